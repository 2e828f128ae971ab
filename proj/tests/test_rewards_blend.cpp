#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "driftblend/blend.hpp"
#include "driftblend/drift.hpp"
#include "driftblend/integrator.hpp"
#include "driftblend/jensen.hpp"
#include "driftblend/metrics.hpp"
#include "driftblend/tilt.hpp"
#include "test_support.hpp"

using namespace dblend;
namespace ts = testing_support;

namespace {
const NoiseSchedule kSchedule(0.1, 20.0, 1.0);

GaussianMixture bimodal(double sep) {
    return GaussianMixture({0.5, 0.5}, {{-sep}, {sep}}, {Mat::identity(1), Mat::identity(1)});
}
}  // namespace

TEST_CASE("preference weights validate the simplex") {
    CHECK_THROWS_AS(PreferenceWeights({0.5, 0.4}), std::invalid_argument);
    CHECK_THROWS_AS(PreferenceWeights({-0.1, 1.1}), std::invalid_argument);
    CHECK_THROWS_AS(PreferenceWeights({}), std::invalid_argument);
    const PreferenceWeights w({0.25, 0.75});
    CHECK(w.w[0] + w.w[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("regularization spec") {
    CHECK_THROWS_AS(RegularizationSpec(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(RegularizationSpec(1.0, -0.5), std::invalid_argument);
    CHECK(RegularizationSpec(2.0, 4.0).effective_alpha() == doctest::Approx(0.5));
    CHECK_THROWS_AS(RegularizationSpec(1.0, 0.0).effective_alpha(), std::domain_error);
}

TEST_CASE("scalarize") {
    const RewardSpec r1 = RewardSpec::linear({1.0, 2.0}, 0.5);
    const RewardSpec r2 = RewardSpec::linear({-1.0, 0.0}, 1.5);

    SUBCASE("one-hot returns the basis reward") {
        const std::vector<RewardSpec> basis{r1, r2};
        const RewardSpec s = scalarize(basis, PreferenceWeights::one_hot(2, 1));
        CHECK(s.kind() == RewardSpec::Kind::Linear);
        CHECK(s.linear_coeff() == r2.linear_coeff());
        CHECK(s.offset() == doctest::Approx(r2.offset()));
    }
    SUBCASE("two linear rewards average coefficients") {
        const std::vector<RewardSpec> basis{r1, r2};
        const RewardSpec s = scalarize(basis, PreferenceWeights({0.5, 0.5}));
        CHECK(s.linear_coeff()[0] == doctest::Approx(0.0));
        CHECK(s.linear_coeff()[1] == doctest::Approx(1.0));
        CHECK(s.offset() == doctest::Approx(1.0));
    }
    SUBCASE("linear plus quadratic closes to quadratic") {
        Mat A(2, 2);
        A(0, 0) = -1.0;
        A(1, 1) = -2.0;
        const RewardSpec q = RewardSpec::quadratic(A, {0.0, 1.0}, 0.0);
        const std::vector<RewardSpec> basis{r1, q};
        const RewardSpec s = scalarize(basis, PreferenceWeights({0.3, 0.7}));
        REQUIRE(s.kind() == RewardSpec::Kind::Quadratic);
        CHECK(s.quadratic_matrix()(0, 0) == doctest::Approx(-0.7));
        CHECK(s.quadratic_matrix()(1, 1) == doctest::Approx(-1.4));
        CHECK(s.linear_coeff()[0] == doctest::Approx(0.3));
        CHECK(s.linear_coeff()[1] == doctest::Approx(0.3 * 2.0 + 0.7 * 1.0));
        RandomSource rng(1, 0);
        for (int i = 0; i < 10; ++i) {
            const Vec x{2.0 * rng.normal(), 2.0 * rng.normal()};
            const double direct = 0.3 * r1.evaluate(x) + 0.7 * q.evaluate(x);
            CHECK(s.evaluate(x) == doctest::Approx(direct).epsilon(1e-12));
        }
    }
    SUBCASE("any blackbox makes the result a combining blackbox") {
        const RewardSpec bb = RewardSpec::blackbox("abs", 2, [](std::span<const double> x) {
            return std::abs(x[0]) + std::abs(x[1]);
        });
        const std::vector<RewardSpec> basis{r1, bb};
        const RewardSpec s = scalarize(basis, PreferenceWeights({0.4, 0.6}));
        CHECK(s.kind() == RewardSpec::Kind::Blackbox);
        const Vec x{1.0, -2.0};
        CHECK(s.evaluate(x) ==
              doctest::Approx(0.4 * r1.evaluate(x) + 0.6 * bb.evaluate(x)).epsilon(1e-12));
    }
    SUBCASE("length mismatch is rejected") {
        const std::vector<RewardSpec> basis{r1, r2};
        CHECK_THROWS_AS(scalarize(basis, PreferenceWeights({1.0})), std::invalid_argument);
    }
    SUBCASE("scalarize is affine in w") {
        RandomSource rng(2, 0);
        const std::vector<RewardSpec> basis{r1, r2};
        for (int i = 0; i < 10; ++i) {
            const double w = rng.uniform();
            const RewardSpec s = scalarize(basis, PreferenceWeights({w, 1.0 - w}));
            const Vec x{rng.normal(), rng.normal()};
            CHECK(s.evaluate(x) ==
                  doctest::Approx(w * r1.evaluate(x) + (1.0 - w) * r2.evaluate(x)).epsilon(1e-12));
        }
    }
}

TEST_CASE("reward evaluation") {
    CHECK(RewardSpec::linear({1.0}, 0.0).evaluate(Vec{2.0}) == doctest::Approx(2.0));
    Mat A(1, 1);
    A(0, 0) = -1.0;
    CHECK(RewardSpec::quadratic(A, {0.0}, 0.0).evaluate(Vec{3.0}) == doctest::Approx(-9.0));
    const RewardSpec bad = RewardSpec::blackbox("bad", 1, [](std::span<const double>) {
        return std::numeric_limits<double>::infinity();
    });
    CHECK_THROWS_AS(bad.evaluate(Vec{0.0}), std::runtime_error);
}

TEST_CASE("db_mpa basics") {
    const GaussianMixture std1 = GaussianMixture::standard(1);
    const RewardSpec r1 = RewardSpec::linear({1.0}, 0.0);
    const RewardSpec r2 = RewardSpec::linear({-1.0}, 0.0);
    const auto f1 = exact_finetuned_drift(std1, r1, 1.0, kSchedule);
    const auto f2 = exact_finetuned_drift(std1, r2, 1.0, kSchedule);

    SUBCASE("one-hot weights reproduce the child") {
        const auto blended = db_mpa({f1, f2}, PreferenceWeights::one_hot(2, 0));
        RandomSource rng(3, 0);
        for (int i = 0; i < 100; ++i) {
            const Vec x{4.0 * rng.normal()};
            const double t = 0.999 * rng.uniform() + 5e-4;
            CHECK(std::abs(blended->eval(x, t)[0] - f1->eval(x, t)[0]) < 1e-12);
        }
    }
    SUBCASE("gaussian/linear blending equals the scalarized oracle drift") {
        RandomSource rng(4, 0);
        for (double w : {0.1, 0.37, 0.5, 0.85}) {
            const auto blended = db_mpa({f1, f2}, PreferenceWeights({w, 1.0 - w}));
            const std::vector<RewardSpec> basis{r1, r2};
            const RewardSpec rw = scalarize(basis, PreferenceWeights({w, 1.0 - w}));
            const auto oracle = exact_finetuned_drift(std1, rw, 1.0, kSchedule);
            for (int i = 0; i < 25; ++i) {
                const Vec x{4.0 * rng.normal()};
                const double t = 0.999 * rng.uniform() + 5e-4;
                CHECK(std::abs(blended->eval(x, t)[0] - oracle->eval(x, t)[0]) < 1e-9);
            }
        }
    }
    SUBCASE("length mismatch rejected") {
        CHECK_THROWS_AS(db_mpa({f1, f2}, PreferenceWeights({1.0})), std::invalid_argument);
    }
}

TEST_CASE("db_mpa residual on a mixture equals the blended jensen gaps") {
    const GaussianMixture mix = bimodal(2.0);
    const RewardSpec r1 = RewardSpec::linear({1.0}, 0.0);
    const RewardSpec r2 = RewardSpec::linear({-1.0}, 0.0);
    const std::vector<RewardSpec> basis{r1, r2};
    const double alpha = 1.0;
    const auto f1 = exact_finetuned_drift(mix, r1, alpha, kSchedule);
    const auto f2 = exact_finetuned_drift(mix, r2, alpha, kSchedule);
    const PreferenceWeights w({0.5, 0.5});
    const auto blended = db_mpa({f1, f2}, w);
    const RewardSpec rw = scalarize(basis, w);
    const auto exact = exact_finetuned_drift(mix, rw, alpha, kSchedule);

    for (double t : {0.2, 0.45}) {
        for (double x : {-1.0, 0.3, 1.7}) {
            const Vec xv{x};
            const double beta = beta_at(kSchedule, t);
            // f_exact - f_blend = -beta (Delta(r(w)) - sum_i w_i Delta(r_i))
            const double lhs = exact->eval(xv, t)[0] - blended->eval(xv, t)[0];
            const double dw = gap_delta(mix, rw, alpha, kSchedule, xv, t)[0];
            const double d1 = gap_delta(mix, r1, alpha, kSchedule, xv, t)[0];
            const double d2 = gap_delta(mix, r2, alpha, kSchedule, xv, t)[0];
            const double rhs = -beta * (dw - 0.5 * d1 - 0.5 * d2);
            CHECK(std::abs(lhs - rhs) < 1e-7);
        }
    }
}

TEST_CASE("db_kla endpoints and extrapolation") {
    const GaussianMixture std1 = GaussianMixture::standard(1);
    const RewardSpec r = RewardSpec::linear({1.0}, 0.0);
    const auto pre = pretrained_drift(std1, kSchedule);
    const auto ft = exact_finetuned_drift(std1, r, 1.0, kSchedule);
    RandomSource rng(5, 0);

    SUBCASE("lambda 0 and 1 reproduce the endpoints") {
        const auto k0 = db_kla(pre, ft, 0.0);
        const auto k1 = db_kla(pre, ft, 1.0);
        for (int i = 0; i < 50; ++i) {
            const Vec x{3.0 * rng.normal()};
            const double t = 0.999 * rng.uniform() + 5e-4;
            CHECK(k0->eval(x, t)[0] == doctest::Approx(pre->eval(x, t)[0]).epsilon(1e-14));
            CHECK(k1->eval(x, t)[0] == doctest::Approx(ft->eval(x, t)[0]).epsilon(1e-14));
        }
    }
    SUBCASE("lambda 2 equals the alpha/2 oracle for the gaussian/linear family") {
        const auto k2 = db_kla(pre, ft, 2.0);
        const auto oracle = exact_finetuned_drift(std1, r, 0.5, kSchedule);
        for (int i = 0; i < 100; ++i) {
            const Vec x{4.0 * rng.normal()};
            const double t = 0.999 * rng.uniform() + 5e-4;
            CHECK(std::abs(k2->eval(x, t)[0] - oracle->eval(x, t)[0]) < 1e-9);
        }
    }
    SUBCASE("negative lambda rejected") {
        CHECK_THROWS_AS(db_kla(pre, ft, -0.1), std::invalid_argument);
    }
}

TEST_CASE("blend affinity and composition consistency") {
    const GaussianMixture mix = bimodal(1.5);
    const auto pre = pretrained_drift(mix, kSchedule);
    const auto f1 = exact_finetuned_drift(mix, RewardSpec::linear({1.0}, 0.0), 1.0, kSchedule);
    const auto f2 = exact_finetuned_drift(mix, RewardSpec::linear({-0.5}, 0.0), 1.0, kSchedule);
    RandomSource rng(6, 0);

    for (int i = 0; i < 50; ++i) {
        const double w = rng.uniform();
        const auto blended = db_mpa({f1, f2}, PreferenceWeights({w, 1.0 - w}));
        const Vec x{3.0 * rng.normal()};
        const double t = 0.999 * rng.uniform() + 5e-4;
        const double direct = w * f1->eval(x, t)[0] + (1.0 - w) * f2->eval(x, t)[0];
        CHECK(std::abs(blended->eval(x, t)[0] - direct) < 1e-12);

        const auto composed = db_kla(pre, blended, 1.0);
        CHECK(composed->eval(x, t)[0] == doctest::Approx(blended->eval(x, t)[0]).epsilon(1e-14));
    }
}

TEST_CASE("blending adds no measurable bias in the exact regime") {
    const GaussianMixture std1 = GaussianMixture::standard(1);
    const RewardSpec r1 = RewardSpec::linear({1.0}, 0.0);
    const RewardSpec r2 = RewardSpec::linear({-1.0}, 0.0);
    const std::vector<RewardSpec> basis{r1, r2};
    const PreferenceWeights w({0.7, 0.3});
    const auto blended = db_mpa({exact_finetuned_drift(std1, r1, 1.0, kSchedule),
                                 exact_finetuned_drift(std1, r2, 1.0, kSchedule)},
                                w);
    const RewardSpec rw = scalarize(basis, w);
    const auto exact = exact_finetuned_drift(std1, rw, 1.0, kSchedule);
    const TiltResult target = tilt_reward(std1, rw, 1.0);
    const TimeGrid grid = TimeGrid::uniform(800, 1.0);

    const SampleBatch sb = euler_maruyama_reverse(*blended, kSchedule, grid, RandomSource(8, 0), 30000, 1);
    const SampleBatch se = euler_maruyama_reverse(*exact, kSchedule, grid, RandomSource(8, 0), 30000, 1);
    const double w1_blend = ts::w1_to_mixture(sb.column(0), target.tilted);
    const double w1_exact = ts::w1_to_mixture(se.column(0), target.tilted);
    CHECK(w1_blend <= w1_exact + 0.01);
}

TEST_CASE("db_kla expected reward is nondecreasing in lambda") {
    const GaussianMixture std1 = GaussianMixture::standard(1);
    const RewardSpec r = RewardSpec::linear({1.0}, 0.0);
    const auto pre = pretrained_drift(std1, kSchedule);
    const auto ft = exact_finetuned_drift(std1, r, 1.0, kSchedule);
    const TimeGrid grid = TimeGrid::uniform(400, 1.0);
    double prev = -1e300;
    double prev_se = 0.0;
    for (double lam : {0.0, 0.5, 1.0, 1.5, 2.0}) {
        const auto kla = db_kla(pre, ft, lam);
        const SampleBatch out =
            euler_maruyama_reverse(*kla, kSchedule, grid, RandomSource(12, 0), 20000, 1);
        const MeanStderr m = expected_reward(out, r);
        CHECK(m.mean >= prev - 3.0 * std::sqrt(m.stderr_ * m.stderr_ + prev_se * prev_se));
        prev = m.mean;
        prev_se = m.stderr_;
    }
}

TEST_CASE("gated blending uses the pre-trained drift above the gate") {
    const GaussianMixture std1 = GaussianMixture::standard(1);
    const auto pre = pretrained_drift(std1, kSchedule);
    const auto f1 = exact_finetuned_drift(std1, RewardSpec::linear({1.0}, 0.0), 1.0, kSchedule);
    const auto f2 = exact_finetuned_drift(std1, RewardSpec::linear({-1.0}, 0.0), 1.0, kSchedule);
    const PreferenceWeights w({0.8, 0.2});
    const auto plain = db_mpa({f1, f2}, w);
    const auto gated = db_mpa_gated({f1, f2}, w, pre, 0.5);
    const Vec x{1.2};
    CHECK(gated->eval(x, 0.8)[0] == doctest::Approx(pre->eval(x, 0.8)[0]).epsilon(1e-14));
    CHECK(gated->eval(x, 0.3)[0] == doctest::Approx(plain->eval(x, 0.3)[0]).epsilon(1e-14));
    const auto always = db_mpa_gated({f1, f2}, w, pre, 2.0);
    CHECK(always->eval(x, 0.9)[0] == doctest::Approx(plain->eval(x, 0.9)[0]).epsilon(1e-14));
}
