#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "driftblend/linalg.hpp"

namespace dblend {

/// Point on the m-simplex used to scalarize a reward basis.
struct PreferenceWeights {
    std::vector<double> w;

    explicit PreferenceWeights(std::vector<double> values);
    static PreferenceWeights one_hot(int m, int i);
    int size() const { return static_cast<int>(w.size()); }
};

/// KL regularization weight alpha and the inference-time modification
/// factor lambda; the effective weight is alpha / lambda, with lambda = 0
/// meaning "pre-trained model" by convention.
struct RegularizationSpec {
    double alpha = 1.0;
    double lambda = 1.0;

    RegularizationSpec() = default;
    RegularizationSpec(double a, double l);
    double effective_alpha() const;
};

/// A reward function over d-vectors: linear a.x + b, quadratic
/// x.A x + a.x + b with symmetric A, or an opaque callable.
class RewardSpec {
  public:
    enum class Kind { Linear, Quadratic, Blackbox };

    static RewardSpec linear(Vec a, double b = 0.0);
    static RewardSpec quadratic(Mat A, Vec a, double b = 0.0);
    static RewardSpec blackbox(std::string name, int dim, std::function<double(std::span<const double>)> fn,
                               double lipschitz_hint = 0.0);

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    const std::string& name() const { return name_; }

    const Vec& linear_coeff() const;
    double offset() const;
    const Mat& quadratic_matrix() const;
    double lipschitz_hint() const { return lipschitz_hint_; }

    double evaluate(std::span<const double> x) const;
    /// Analytic gradient for linear/quadratic; central finite differences
    /// (relative step 1e-4) for blackbox rewards.
    Vec gradient(std::span<const double> x) const;

  private:
    RewardSpec() = default;
    Kind kind_ = Kind::Linear;
    int dim_ = 0;
    Vec a_;
    double b_ = 0.0;
    Mat A_;
    std::string name_;
    std::function<double(std::span<const double>)> fn_;
    double lipschitz_hint_ = 0.0;
};

/// Linear scalarization sum_i w_i r_i. The result is closed under the
/// richest variant present: all-linear stays linear, any quadratic makes
/// the result quadratic, any blackbox makes it a combining blackbox.
RewardSpec scalarize(std::span<const RewardSpec> basis, const PreferenceWeights& w);

/// Built-in blackbox catalog, keyed by name. Currently:
///   "negdist": -||x - target||^2
RewardSpec blackbox_from_catalog(const std::string& name, Vec params);

}  // namespace dblend
