#include "driftblend/blend.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace dblend {

namespace {

std::string joined_tags(const std::vector<DriftPtr>& drifts) {
    std::string s;
    for (size_t i = 0; i < drifts.size(); ++i) {
        if (i) s += ",";
        s += drifts[i]->provenance();
    }
    return s;
}

class MpaDrift final : public DriftModel {
  public:
    MpaDrift(std::vector<DriftPtr> drifts, std::vector<double> w, DriftPtr pre, double t_gate)
        : drifts_(std::move(drifts)), w_(std::move(w)), pre_(std::move(pre)), t_gate_(t_gate) {
        tag_ = "db_mpa(" + joined_tags(drifts_) + ")";
    }

    int dim() const override { return drifts_[0]->dim(); }
    double horizon() const override { return drifts_[0]->horizon(); }
    const std::string& provenance() const override { return tag_; }

    void eval_batch(std::span<const double> xs, double t, std::span<double> out) const override {
        if (pre_ && t > t_gate_) {
            pre_->eval_batch(xs, t, out);
            return;
        }
        std::vector<double> tmp(xs.size());
        for (size_t i = 0; i < out.size(); ++i) out[i] = 0.0;
        for (size_t m = 0; m < drifts_.size(); ++m) {
            drifts_[m]->eval_batch(xs, t, tmp);
            const double wm = w_[m];
            for (size_t i = 0; i < out.size(); ++i) out[i] += wm * tmp[i];
        }
    }

  private:
    std::vector<DriftPtr> drifts_;
    std::vector<double> w_;
    DriftPtr pre_;
    double t_gate_;
    std::string tag_;
};

class KlaDrift final : public DriftModel {
  public:
    KlaDrift(DriftPtr pre, DriftPtr finetuned, double lambda)
        : pre_(std::move(pre)), ft_(std::move(finetuned)), lambda_(lambda) {
        tag_ = "db_kla(" + pre_->provenance() + "," + ft_->provenance() +
               ",lambda=" + std::to_string(lambda_) + ")";
    }

    int dim() const override { return pre_->dim(); }
    double horizon() const override { return pre_->horizon(); }
    const std::string& provenance() const override { return tag_; }

    void eval_batch(std::span<const double> xs, double t, std::span<double> out) const override {
        if (lambda_ == 0.0) {
            pre_->eval_batch(xs, t, out);
            return;
        }
        if (lambda_ == 1.0) {
            ft_->eval_batch(xs, t, out);
            return;
        }
        std::vector<double> tmp(xs.size());
        pre_->eval_batch(xs, t, out);
        ft_->eval_batch(xs, t, tmp);
        for (size_t i = 0; i < out.size(); ++i)
            out[i] = (1.0 - lambda_) * out[i] + lambda_ * tmp[i];
    }

  private:
    DriftPtr pre_;
    DriftPtr ft_;
    double lambda_;
    std::string tag_;
};

void check_members(const std::vector<DriftPtr>& drifts) {
    for (const auto& d : drifts)
        if (!d) throw std::invalid_argument("blend: null drift model");
    for (size_t i = 1; i < drifts.size(); ++i) {
        if (drifts[i]->dim() != drifts[0]->dim())
            throw std::invalid_argument("blend: drift dimensions differ");
        if (std::abs(drifts[i]->horizon() - drifts[0]->horizon()) > 1e-12)
            throw std::invalid_argument("blend: drift horizons differ");
    }
}

}  // namespace

DriftPtr db_mpa(std::vector<DriftPtr> drifts, const PreferenceWeights& w) {
    if (drifts.empty()) throw std::invalid_argument("db_mpa: no drifts");
    if (static_cast<int>(drifts.size()) != w.size())
        throw std::invalid_argument("db_mpa: drift and weight lengths differ");
    check_members(drifts);
    return std::make_shared<MpaDrift>(std::move(drifts), w.w, nullptr,
                                      std::numeric_limits<double>::infinity());
}

DriftPtr db_mpa_gated(std::vector<DriftPtr> drifts, const PreferenceWeights& w, DriftPtr pre,
                      double t_gate) {
    if (drifts.empty()) throw std::invalid_argument("db_mpa_gated: no drifts");
    if (static_cast<int>(drifts.size()) != w.size())
        throw std::invalid_argument("db_mpa_gated: drift and weight lengths differ");
    if (!pre) throw std::invalid_argument("db_mpa_gated: null pre-trained drift");
    check_members(drifts);
    if (pre->dim() != drifts[0]->dim())
        throw std::invalid_argument("db_mpa_gated: pre-trained dimension differs");
    return std::make_shared<MpaDrift>(std::move(drifts), w.w, std::move(pre), t_gate);
}

DriftPtr db_kla(DriftPtr pre, DriftPtr finetuned, double lambda) {
    if (!pre || !finetuned) throw std::invalid_argument("db_kla: null drift model");
    if (!(lambda >= 0.0)) throw std::invalid_argument("db_kla: lambda must be >= 0");
    if (pre->dim() != finetuned->dim()) throw std::invalid_argument("db_kla: dimensions differ");
    if (std::abs(pre->horizon() - finetuned->horizon()) > 1e-12)
        throw std::invalid_argument("db_kla: horizons differ");
    return std::make_shared<KlaDrift>(std::move(pre), std::move(finetuned), lambda);
}

}  // namespace dblend
