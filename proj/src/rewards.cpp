#include "driftblend/rewards.hpp"

#include <cmath>
#include <stdexcept>

namespace dblend {

PreferenceWeights::PreferenceWeights(std::vector<double> values) : w(std::move(values)) {
    if (w.empty()) throw std::invalid_argument("PreferenceWeights: empty weight vector");
    double sum = 0.0;
    for (double v : w) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("PreferenceWeights: entries must be nonnegative");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("PreferenceWeights: weights must sum to 1, got " +
                                    std::to_string(sum));
    for (double& v : w) v /= sum;
}

PreferenceWeights PreferenceWeights::one_hot(int m, int i) {
    if (i < 0 || i >= m) throw std::invalid_argument("PreferenceWeights::one_hot: index out of range");
    std::vector<double> v(m, 0.0);
    v[i] = 1.0;
    return PreferenceWeights(std::move(v));
}

RegularizationSpec::RegularizationSpec(double a, double l) : alpha(a), lambda(l) {
    if (!(alpha > 0.0)) throw std::invalid_argument("RegularizationSpec: alpha must be > 0");
    if (!(lambda >= 0.0)) throw std::invalid_argument("RegularizationSpec: lambda must be >= 0");
}

double RegularizationSpec::effective_alpha() const {
    if (lambda == 0.0)
        throw std::domain_error(
            "RegularizationSpec: effective alpha undefined at lambda=0 (pre-trained model)");
    return alpha / lambda;
}

RewardSpec RewardSpec::linear(Vec a, double b) {
    RewardSpec r;
    r.kind_ = Kind::Linear;
    r.dim_ = static_cast<int>(a.size());
    r.a_ = std::move(a);
    r.b_ = b;
    r.name_ = "linear";
    for (double v : r.a_)
        if (!std::isfinite(v)) throw std::invalid_argument("RewardSpec: non-finite coefficient");
    if (!std::isfinite(b)) throw std::invalid_argument("RewardSpec: non-finite offset");
    if (r.dim_ == 0) throw std::invalid_argument("RewardSpec: empty coefficient vector");
    return r;
}

RewardSpec RewardSpec::quadratic(Mat A, Vec a, double b) {
    RewardSpec r;
    r.kind_ = Kind::Quadratic;
    r.dim_ = static_cast<int>(a.size());
    if (A.rows != r.dim_ || A.cols != r.dim_)
        throw std::invalid_argument("RewardSpec: quadratic matrix shape mismatch");
    if (!is_symmetric(A)) throw std::invalid_argument("RewardSpec: quadratic matrix must be symmetric");
    for (double v : A.a)
        if (!std::isfinite(v)) throw std::invalid_argument("RewardSpec: non-finite matrix entry");
    for (double v : a)
        if (!std::isfinite(v)) throw std::invalid_argument("RewardSpec: non-finite coefficient");
    if (!std::isfinite(b)) throw std::invalid_argument("RewardSpec: non-finite offset");
    r.A_ = std::move(A);
    r.a_ = std::move(a);
    r.b_ = b;
    r.name_ = "quadratic";
    return r;
}

RewardSpec RewardSpec::blackbox(std::string name, int dim,
                                std::function<double(std::span<const double>)> fn,
                                double lipschitz_hint) {
    if (dim < 1) throw std::invalid_argument("RewardSpec: blackbox dimension must be >= 1");
    if (!fn) throw std::invalid_argument("RewardSpec: blackbox callable is empty");
    RewardSpec r;
    r.kind_ = Kind::Blackbox;
    r.dim_ = dim;
    r.name_ = std::move(name);
    r.fn_ = std::move(fn);
    r.lipschitz_hint_ = lipschitz_hint;
    return r;
}

const Vec& RewardSpec::linear_coeff() const {
    if (kind_ == Kind::Blackbox) throw std::logic_error("RewardSpec: blackbox has no coefficients");
    return a_;
}

double RewardSpec::offset() const {
    if (kind_ == Kind::Blackbox) throw std::logic_error("RewardSpec: blackbox has no offset");
    return b_;
}

const Mat& RewardSpec::quadratic_matrix() const {
    if (kind_ != Kind::Quadratic) throw std::logic_error("RewardSpec: not a quadratic reward");
    return A_;
}

double RewardSpec::evaluate(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_)
        throw std::invalid_argument("RewardSpec::evaluate: dimension mismatch");
    switch (kind_) {
        case Kind::Linear:
            return dot(a_, x) + b_;
        case Kind::Quadratic: {
            double q = 0.0;
            for (int i = 0; i < dim_; ++i) {
                double row = 0.0;
                for (int j = 0; j < dim_; ++j) row += A_(i, j) * x[j];
                q += x[i] * row;
            }
            return q + dot(a_, x) + b_;
        }
        case Kind::Blackbox: {
            const double v = fn_(x);
            if (!std::isfinite(v))
                throw std::runtime_error("RewardSpec: blackbox '" + name_ +
                                         "' returned a non-finite value");
            return v;
        }
    }
    throw std::logic_error("RewardSpec: unknown kind");
}

Vec RewardSpec::gradient(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_)
        throw std::invalid_argument("RewardSpec::gradient: dimension mismatch");
    switch (kind_) {
        case Kind::Linear:
            return a_;
        case Kind::Quadratic: {
            Vec g = mat_vec(A_, x);
            for (int i = 0; i < dim_; ++i) g[i] = 2.0 * g[i] + a_[i];
            return g;
        }
        case Kind::Blackbox: {
            Vec g(dim_);
            Vec probe(x.begin(), x.end());
            for (int i = 0; i < dim_; ++i) {
                const double h = 1e-4 * std::max(1.0, std::abs(x[i]));
                probe[i] = x[i] + h;
                const double up = evaluate(probe);
                probe[i] = x[i] - h;
                const double down = evaluate(probe);
                probe[i] = x[i];
                g[i] = (up - down) / (2.0 * h);
            }
            return g;
        }
    }
    throw std::logic_error("RewardSpec: unknown kind");
}

RewardSpec scalarize(std::span<const RewardSpec> basis, const PreferenceWeights& w) {
    if (basis.empty()) throw std::invalid_argument("scalarize: empty basis");
    if (static_cast<int>(basis.size()) != w.size())
        throw std::invalid_argument("scalarize: basis and weight lengths differ");
    const int d = basis[0].dim();
    bool any_quadratic = false;
    bool any_blackbox = false;
    for (const RewardSpec& r : basis) {
        if (r.dim() != d) throw std::invalid_argument("scalarize: reward dimensions differ");
        any_quadratic |= r.kind() == RewardSpec::Kind::Quadratic;
        any_blackbox |= r.kind() == RewardSpec::Kind::Blackbox;
    }
    if (any_blackbox) {
        std::vector<RewardSpec> parts(basis.begin(), basis.end());
        std::vector<double> weights = w.w;
        return RewardSpec::blackbox(
            "scalarized", d,
            [parts, weights](std::span<const double> x) {
                double s = 0.0;
                for (size_t i = 0; i < parts.size(); ++i) s += weights[i] * parts[i].evaluate(x);
                return s;
            });
    }
    Vec a(d, 0.0);
    double b = 0.0;
    Mat A(d, d);
    for (size_t i = 0; i < basis.size(); ++i) {
        const double wi = w.w[i];
        const Vec& ai = basis[i].linear_coeff();
        for (int j = 0; j < d; ++j) a[j] += wi * ai[j];
        b += wi * basis[i].offset();
        if (basis[i].kind() == RewardSpec::Kind::Quadratic) {
            const Mat& Ai = basis[i].quadratic_matrix();
            for (size_t k = 0; k < A.a.size(); ++k) A.a[k] += wi * Ai.a[k];
        }
    }
    if (any_quadratic) return RewardSpec::quadratic(std::move(A), std::move(a), b);
    return RewardSpec::linear(std::move(a), b);
}

RewardSpec blackbox_from_catalog(const std::string& name, Vec params) {
    if (name == "negdist") {
        if (params.empty()) throw std::invalid_argument("negdist: target vector required");
        const int d = static_cast<int>(params.size());
        Vec target = std::move(params);
        return RewardSpec::blackbox("negdist", d, [target](std::span<const double> x) {
            double s = 0.0;
            for (size_t i = 0; i < target.size(); ++i) {
                const double diff = x[i] - target[i];
                s += diff * diff;
            }
            return -s;
        });
    }
    throw std::invalid_argument("blackbox_from_catalog: unknown reward '" + name + "'");
}

}  // namespace dblend
