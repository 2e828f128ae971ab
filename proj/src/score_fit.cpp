#include "driftblend/score_fit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "driftblend/quadrature.hpp"

namespace dblend {

namespace {

/// Exponent tuples for all monomials in `dim` variables of total degree <= degree.
std::vector<std::vector<int>> enumerate_monomials(int dim, int degree) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(dim, 0);
    // counted enumeration in graded lexicographic order
    auto rec = [&](auto&& self, int pos, int remaining) -> void {
        if (pos == dim) {
            out.push_back(cur);
            return;
        }
        for (int e = 0; e <= remaining; ++e) {
            cur[pos] = e;
            self(self, pos + 1, remaining - e);
        }
        cur[pos] = 0;
    };
    for (int total = 0; total <= degree; ++total) {
        std::vector<std::vector<int>> layer;
        std::vector<int> tmp(dim, 0);
        auto rec2 = [&](auto&& self, int pos, int remaining) -> void {
            if (pos == dim - 1) {
                tmp[pos] = remaining;
                layer.push_back(tmp);
                return;
            }
            for (int e = remaining; e >= 0; --e) {
                tmp[pos] = e;
                self(self, pos + 1, remaining - e);
            }
        };
        rec2(rec2, 0, total);
        for (auto& m : layer) out.push_back(std::move(m));
    }
    (void)rec;
    return out;
}

}  // namespace

ScoreModel ScoreModel::polynomial(int dim, int degree, int time_bins, double horizon) {
    if (dim < 1 || degree < 0 || time_bins < 1 || !(horizon > 0.0))
        throw std::invalid_argument("ScoreModel::polynomial: invalid parameters");
    ScoreModel m;
    m.family_ = FeatureFamily::Polynomial;
    m.dim_ = dim;
    m.degree_ = degree;
    m.horizon_ = horizon;
    m.monomials_ = enumerate_monomials(dim, degree);
    m.theta_.resize(time_bins);
    m.init_theta();
    return m;
}

ScoreModel ScoreModel::radial_basis(std::vector<Vec> centers, double bandwidth, int time_bins,
                                    double horizon) {
    if (centers.empty() || !(bandwidth > 0.0) || time_bins < 1 || !(horizon > 0.0))
        throw std::invalid_argument("ScoreModel::radial_basis: invalid parameters");
    ScoreModel m;
    m.family_ = FeatureFamily::RadialBasis;
    m.dim_ = static_cast<int>(centers[0].size());
    for (const Vec& c : centers)
        if (static_cast<int>(c.size()) != m.dim_)
            throw std::invalid_argument("ScoreModel::radial_basis: center dimension mismatch");
    m.centers_ = std::move(centers);
    m.bandwidth_ = bandwidth;
    m.horizon_ = horizon;
    m.theta_.resize(time_bins);
    m.init_theta();
    return m;
}

void ScoreModel::init_theta() {
    const int F = feature_count();
    for (Mat& th : theta_) th = Mat(F, dim_);
}

int ScoreModel::feature_count() const {
    return family_ == FeatureFamily::Polynomial ? static_cast<int>(monomials_.size())
                                                : static_cast<int>(centers_.size());
}

bool ScoreModel::same_architecture(const ScoreModel& other) const {
    if (family_ != other.family_ || dim_ != other.dim_ || time_bins() != other.time_bins() ||
        horizon_ != other.horizon_)
        return false;
    if (family_ == FeatureFamily::Polynomial) return degree_ == other.degree_;
    if (bandwidth_ != other.bandwidth_ || centers_.size() != other.centers_.size()) return false;
    for (size_t i = 0; i < centers_.size(); ++i)
        if (centers_[i] != other.centers_[i]) return false;
    return true;
}

void ScoreModel::features(std::span<const double> x, std::span<double> phi) const {
    if (family_ == FeatureFamily::Polynomial) {
        for (size_t f = 0; f < monomials_.size(); ++f) {
            double v = 1.0;
            for (int j = 0; j < dim_; ++j)
                for (int e = 0; e < monomials_[f][j]; ++e) v *= x[j];
            phi[f] = v;
        }
    } else {
        const double inv = 1.0 / (2.0 * bandwidth_ * bandwidth_);
        for (size_t f = 0; f < centers_.size(); ++f) {
            double d2 = 0.0;
            for (int j = 0; j < dim_; ++j) {
                const double diff = x[j] - centers_[f][j];
                d2 += diff * diff;
            }
            phi[f] = std::exp(-d2 * inv);
        }
    }
}

int ScoreModel::bin_of(double t) const {
    const int bins = time_bins();
    int b = static_cast<int>(t / horizon_ * bins);
    return std::clamp(b, 0, bins - 1);
}

Vec ScoreModel::evaluate(std::span<const double> x, double t) const {
    Vec out(dim_);
    evaluate_batch(x, t, out);
    return out;
}

void ScoreModel::evaluate_batch(std::span<const double> xs, double t, std::span<double> out) const {
    const Mat& th = theta_[bin_of(t)];
    const int F = feature_count();
    const size_t n = xs.size() / dim_;
    std::vector<double> phi(F);
    for (size_t i = 0; i < n; ++i) {
        features(xs.subspan(i * dim_, dim_), phi);
        for (int j = 0; j < dim_; ++j) {
            double s = 0.0;
            for (int f = 0; f < F; ++f) s += phi[f] * th(f, j);
            out[i * dim_ + j] = s;
        }
    }
}

TrainReport dsm_train(ScoreModel& model, const SampleBatch& data, const NoiseSchedule& schedule,
                      const TrainConfig& config, RandomSource rng) {
    if (data.size() == 0) throw std::invalid_argument("dsm_train: empty training batch");
    if (data.dim != model.dim()) throw std::invalid_argument("dsm_train: data dimension mismatch");
    if (config.num_samples < 1 || config.time_bins < 1 || !(config.ridge > 0.0))
        throw std::invalid_argument("dsm_train: invalid training configuration");
    if (config.time_bins != model.time_bins())
        throw std::invalid_argument("dsm_train: config bins differ from model bins");

    const int d = model.dim();
    const int F = model.feature_count();
    const int bins = config.time_bins;
    const double T = schedule.horizon;

    // per-bin weighted normal equations G = Phi' W Phi, B = Phi' W Y
    std::vector<Mat> G(bins, Mat(F, F));
    std::vector<Mat> B(bins, Mat(F, d));
    std::vector<double> phi(F);
    Vec xt(d), target(d);
    const size_t n_data = data.size();
    for (int s = 0; s < config.num_samples; ++s) {
        const size_t idx = static_cast<size_t>(rng.uniform() * n_data) % n_data;
        std::span<const double> x0 = data.point(idx);
        // keep t away from 0 so the 1/(1-ab) target stays bounded
        const double t = std::max(1e-4 * T, rng.uniform() * T);
        const double ab = alpha_bar(schedule, t);
        const double signal = std::sqrt(ab);
        const double noise = std::sqrt(1.0 - ab);
        for (int j = 0; j < d; ++j) {
            const double eps = rng.normal();
            xt[j] = signal * x0[j] + noise * eps;
            target[j] = -eps / noise;  // = -(x_t - sqrt(ab) x_0)/(1 - ab)
        }
        const double w = config.weighting == DsmWeighting::Uniform ? 1.0 : (1.0 - ab);
        model.features(xt, phi);
        const int b = model.bin_of(t);
        Mat& Gb = G[b];
        Mat& Bb = B[b];
        for (int f = 0; f < F; ++f) {
            const double wphi = w * phi[f];
            for (int g = 0; g <= f; ++g) Gb(f, g) += wphi * phi[g];
            for (int j = 0; j < d; ++j) Bb(f, j) += wphi * target[j];
        }
    }

    TrainReport report;
    for (int b = 0; b < bins; ++b) {
        Mat& Gb = G[b];
        for (int f = 0; f < F; ++f)
            for (int g = f + 1; g < F; ++g) Gb(f, g) = Gb(g, f);
        double ridge = config.ridge;
        for (int attempt = 0;; ++attempt) {
            Mat A = Gb;
            for (int f = 0; f < F; ++f) A(f, f) += ridge;
            try {
                const Mat L = cholesky(A);
                Vec rhs(F);
                for (int j = 0; j < d; ++j) {
                    for (int f = 0; f < F; ++f) rhs[f] = B[b](f, j);
                    const Vec sol = chol_solve(L, rhs);
                    for (int f = 0; f < F; ++f) model.coefficients(b)(f, j) = sol[f];
                }
                break;
            } catch (const std::domain_error&) {
                if (attempt >= 8)
                    throw std::runtime_error("dsm_train: normal equations singular in bin " +
                                             std::to_string(b));
                double trace = 0.0;
                for (int f = 0; f < F; ++f) trace += Gb(f, f);
                ridge = std::max(ridge * 100.0, 1e-10 * (1.0 + trace / F));
                ++report.ridge_bumps;
                report.warnings.push_back("bin " + std::to_string(b) + ": ridge raised to " +
                                          std::to_string(ridge));
            }
        }
    }

    // final objective on a fresh pass of the same generator state family
    RandomSource eval_rng = rng.substream(0xEA11);
    double num = 0.0, den = 0.0;
    const int eval_n = std::min(config.num_samples, 20000);
    Vec pred(d);
    for (int s = 0; s < eval_n; ++s) {
        const size_t idx = static_cast<size_t>(eval_rng.uniform() * n_data) % n_data;
        std::span<const double> x0 = data.point(idx);
        const double t = std::max(1e-4 * T, eval_rng.uniform() * T);
        const double ab = alpha_bar(schedule, t);
        const double noise = std::sqrt(1.0 - ab);
        for (int j = 0; j < d; ++j) {
            const double eps = eval_rng.normal();
            xt[j] = std::sqrt(ab) * x0[j] + noise * eps;
            target[j] = -eps / noise;
        }
        const double w = config.weighting == DsmWeighting::Uniform ? 1.0 : (1.0 - ab);
        pred = model.evaluate(xt, t);
        double err = 0.0;
        for (int j = 0; j < d; ++j) err += (pred[j] - target[j]) * (pred[j] - target[j]);
        num += w * err;
        den += w;
    }
    report.objective = num / den;
    return report;
}

double score_mse(const ScoreModel& model, const GaussianMixture& truth,
                 const NoiseSchedule& schedule, const std::vector<double>& ts) {
    if (truth.dim() > 2) throw std::invalid_argument("score_mse: quadrature limited to 1D/2D");
    if (ts.empty()) throw std::invalid_argument("score_mse: empty time grid");
    double acc = 0.0;
    for (double t : ts) {
        const GaussianMixture marg = marginal_at(truth, schedule, t);
        // bounding box from component extents
        double lo = 1e300, hi = -1e300;
        for (int k = 0; k < marg.components(); ++k) {
            double smax = 0.0;
            for (int i = 0; i < marg.dim(); ++i) smax = std::max(smax, marg.covariance(k)(i, i));
            const double reach = 12.0 * std::sqrt(smax);
            for (int i = 0; i < marg.dim(); ++i) {
                lo = std::min(lo, marg.mean(k)[i] - reach);
                hi = std::max(hi, marg.mean(k)[i] + reach);
            }
        }
        if (truth.dim() == 1) {
            acc += integrate_1d(
                [&](double x) {
                    const Vec xv{x};
                    const Vec sm = model.evaluate(xv, t);
                    const Vec st = marg.score(xv);
                    return marg.density(xv) * (sm[0] - st[0]) * (sm[0] - st[0]);
                },
                lo, hi, 256);
        } else {
            acc += integrate_2d(
                [&](double x, double y) {
                    const Vec xv{x, y};
                    const Vec sm = model.evaluate(xv, t);
                    const Vec st = marg.score(xv);
                    double e = 0.0;
                    for (int i = 0; i < 2; ++i) e += (sm[i] - st[i]) * (sm[i] - st[i]);
                    return marg.density(xv) * e;
                },
                lo, hi, lo, hi, 32);
        }
    }
    return acc / static_cast<double>(ts.size());
}

ScoreModel average_params(std::span<const ScoreModel> models, const PreferenceWeights& w) {
    if (models.empty()) throw std::invalid_argument("average_params: no models");
    if (static_cast<int>(models.size()) != w.size())
        throw std::invalid_argument("average_params: model and weight lengths differ");
    for (size_t i = 1; i < models.size(); ++i)
        if (!models[0].same_architecture(models[i]))
            throw std::invalid_argument("average_params: architecture mismatch between models");
    ScoreModel out = models[0];
    for (int b = 0; b < out.time_bins(); ++b) {
        Mat& th = out.coefficients(b);
        for (size_t e = 0; e < th.a.size(); ++e) {
            double v = 0.0;
            for (size_t m = 0; m < models.size(); ++m) v += w.w[m] * models[m].coefficients(b).a[e];
            th.a[e] = v;
        }
    }
    return out;
}

DriftPtr drift_from_model(ScoreModel model, NoiseSchedule schedule, std::string tag) {
    auto shared = std::make_shared<ScoreModel>(std::move(model));
    const int dim = shared->dim();
    return drift_from_score(
        [shared](std::span<const double> xs, double t, std::span<double> out) {
            shared->evaluate_batch(xs, t, out);
        },
        dim, schedule, std::move(tag));
}

}  // namespace dblend
