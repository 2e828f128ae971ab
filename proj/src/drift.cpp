#include "driftblend/drift.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace dblend {

Vec DriftModel::eval(std::span<const double> x, double t) const {
    Vec out(x.size());
    eval_batch(x, t, out);
    return out;
}

namespace {

/// Drift backed by a closed-form data-law mixture: per evaluation time the
/// marginal mixture is materialized once and scored across the whole batch.
class GmmScoreDrift final : public DriftModel {
  public:
    GmmScoreDrift(GaussianMixture law, NoiseSchedule schedule, std::string tag)
        : law_(std::move(law)), schedule_(schedule), tag_(std::move(tag)) {}

    int dim() const override { return law_.dim(); }
    double horizon() const override { return schedule_.horizon; }
    const std::string& provenance() const override { return tag_; }
    const GaussianMixture* data_law() const override { return &law_; }

    void eval_batch(std::span<const double> xs, double t, std::span<double> out) const override {
        const double beta = beta_at(schedule_, t);
        const GaussianMixture marg = marginal_at(law_, schedule_, t);
        marg.score_batch(xs, out);
        for (size_t i = 0; i < xs.size(); ++i) out[i] = -0.5 * beta * xs[i] - beta * out[i];
    }

  private:
    GaussianMixture law_;
    NoiseSchedule schedule_;
    std::string tag_;
};

class ScoreFnDrift final : public DriftModel {
  public:
    ScoreFnDrift(ScoreBatchFn score, int dim, NoiseSchedule schedule, std::string tag)
        : score_(std::move(score)), dim_(dim), schedule_(schedule), tag_(std::move(tag)) {}

    int dim() const override { return dim_; }
    double horizon() const override { return schedule_.horizon; }
    const std::string& provenance() const override { return tag_; }

    void eval_batch(std::span<const double> xs, double t, std::span<double> out) const override {
        const double beta = beta_at(schedule_, t);
        score_(xs, t, out);
        for (size_t i = 0; i < xs.size(); ++i) out[i] = -0.5 * beta * xs[i] - beta * out[i];
    }

  private:
    ScoreBatchFn score_;
    int dim_;
    NoiseSchedule schedule_;
    std::string tag_;
};

}  // namespace

DriftPtr pretrained_drift(GaussianMixture prior, NoiseSchedule schedule) {
    return std::make_shared<GmmScoreDrift>(std::move(prior), schedule, "pretrained");
}

DriftPtr exact_finetuned_drift(const GaussianMixture& prior, const RewardSpec& reward, double alpha,
                               const NoiseSchedule& schedule) {
    TiltResult tilt = tilt_reward(prior, reward, alpha);
    std::string tag = "exact_tilted(" + reward.name() + ",alpha=" + std::to_string(alpha) + ")";
    return std::make_shared<GmmScoreDrift>(std::move(tilt.tilted), schedule, std::move(tag));
}

DriftPtr drift_from_score(ScoreBatchFn score, int dim, NoiseSchedule schedule, std::string tag) {
    if (!score) throw std::invalid_argument("drift_from_score: empty score function");
    if (dim < 1) throw std::invalid_argument("drift_from_score: dim must be >= 1");
    return std::make_shared<ScoreFnDrift>(std::move(score), dim, schedule, std::move(tag));
}

void score_from_drift(const DriftModel& drift, const NoiseSchedule& schedule,
                      std::span<const double> xs, double t, std::span<double> out) {
    const double beta = beta_at(schedule, t);
    drift.eval_batch(xs, t, out);
    for (size_t i = 0; i < xs.size(); ++i) out[i] = -(out[i] / beta + 0.5 * xs[i]);
}

}  // namespace dblend
