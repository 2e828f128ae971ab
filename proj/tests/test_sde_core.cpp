#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "driftblend/drift.hpp"
#include "driftblend/integrator.hpp"
#include "driftblend/quadrature.hpp"
#include "driftblend/rng.hpp"
#include "driftblend/schedule.hpp"
#include "test_support.hpp"

using namespace dblend;

namespace {
const NoiseSchedule kSchedule(0.1, 20.0, 1.0);
}

TEST_CASE("linear beta schedule") {
    CHECK(beta_at(kSchedule, 0.0) == doctest::Approx(0.1));
    CHECK(beta_at(kSchedule, 1.0) == doctest::Approx(20.0));
    CHECK(beta_at(kSchedule, 0.5) == doctest::Approx(10.05));
    CHECK_THROWS_AS(beta_at(kSchedule, -0.1), std::domain_error);
    CHECK_THROWS_AS(beta_at(kSchedule, 1.1), std::domain_error);
    CHECK_THROWS_AS(NoiseSchedule(0.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(NoiseSchedule(2.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(NoiseSchedule(0.1, 20.0, 0.0), std::invalid_argument);
}

TEST_CASE("alpha_bar closed form") {
    CHECK(alpha_bar(kSchedule, 0.0) == doctest::Approx(1.0));
    CHECK(alpha_bar(kSchedule, 1.0) == doctest::Approx(std::exp(-10.05)).epsilon(1e-12));
    CHECK(alpha_bar(kSchedule, 0.3) > alpha_bar(kSchedule, 0.7));

    // matches numeric quadrature of beta at 100 grid points
    double worst = 0.0;
    for (int i = 1; i <= 100; ++i) {
        const double t = i / 100.0;
        const double integral = integrate_1d([&](double s) { return beta_at(kSchedule, s); }, 0.0, t, 64);
        worst = std::max(worst, std::abs(alpha_bar(kSchedule, t) - std::exp(-integral)));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("time grids") {
    const TimeGrid g = TimeGrid::uniform(4, 1.0);
    REQUIRE(g.num_steps() == 4);
    CHECK(g.knots.front() == 0.0);
    CHECK(g.knots.back() == 1.0);
    CHECK(g.knots[2] == doctest::Approx(0.5));

    const TimeGrid geo = TimeGrid::geometric(8, 1.0, 2.0);
    CHECK(geo.knots.front() == 0.0);
    CHECK(geo.knots.back() == 1.0);
    for (size_t i = 1; i < geo.knots.size(); ++i) CHECK(geo.knots[i] > geo.knots[i - 1]);
    // gamma > 1 concentrates knots near zero
    CHECK(geo.knots[4] < 0.5);

    CHECK_THROWS_AS(TimeGrid::uniform(0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid({0.0, 0.5, 0.5, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid({0.1, 0.5, 1.0}), std::invalid_argument);
}

TEST_CASE("random source determinism and stream independence") {
    RandomSource a(123, 7), b(123, 7), c(123, 8);
    bool identical = true, all_same = true;
    for (int i = 0; i < 1000; ++i) {
        const double va = a.normal(), vb = b.normal(), vc = c.normal();
        identical &= va == vb;
        all_same &= va == vc;
    }
    CHECK(identical);
    CHECK_FALSE(all_same);

    // child streams do not perturb the parent
    RandomSource p1(5, 0), p2(5, 0);
    (void)p1.substream(3);
    CHECK(p1.normal() == p2.normal());

    // crude moment check on the generator
    RandomSource m(99, 0);
    double mean = 0.0, m2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double v = m.normal();
        mean += v;
        m2 += v * v;
    }
    mean /= n;
    const double var = m2 / n - mean * mean;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("forward_perturb") {
    RandomSource rng(1, 0);
    std::vector<double> zeros(20000, 0.0);
    const SampleBatch x0(1, 0.0, zeros);

    SUBCASE("t = 0 is the identity") {
        RandomSource r(2, 0);
        const SampleBatch out = forward_perturb(x0, 0.0, kSchedule, r);
        CHECK(out.data == x0.data);
    }
    SUBCASE("variance matches 1 - alpha_bar") {
        const double t = 0.35;
        const SampleBatch out = forward_perturb(x0, t, kSchedule, rng);
        const double expect = 1.0 - alpha_bar(kSchedule, t);
        const double se = expect * std::sqrt(2.0 / (out.size() - 1));
        CHECK(std::abs(out.variance()[0] - expect) < 3.0 * se);
    }
    SUBCASE("mean matches sqrt(alpha_bar) mu") {
        RandomSource gen(3, 0);
        std::vector<double> data(20000);
        for (double& v : data) v = 2.0 + 0.5 * gen.normal();
        const SampleBatch batch(1, 0.0, std::move(data));
        const double t = 0.25;
        const SampleBatch out = forward_perturb(batch, t, kSchedule, rng);
        const double ab = alpha_bar(kSchedule, t);
        const double expect = std::sqrt(ab) * 2.0;
        const double sd = std::sqrt(ab * 0.25 + (1.0 - ab));
        CHECK(std::abs(out.mean()[0] - expect) < 3.0 * sd / std::sqrt(20000.0));
    }
}

TEST_CASE("reverse integrator recovers the stationary law") {
    const auto pre = pretrained_drift(GaussianMixture::standard(1), kSchedule);
    const TimeGrid grid = TimeGrid::uniform(1000, 1.0);
    const SampleBatch out = euler_maruyama_reverse(*pre, kSchedule, grid, RandomSource(42, 0), 50000, 1);
    CHECK(std::abs(out.mean()[0]) < 0.02);
    CHECK(out.variance()[0] > 0.97);
    CHECK(out.variance()[0] < 1.03);
}

TEST_CASE("reverse integrator recovers a shifted prior mean") {
    const auto pre = pretrained_drift(GaussianMixture::single({3.0}, Mat::identity(1)), kSchedule);
    const TimeGrid grid = TimeGrid::uniform(1000, 1.0);
    const SampleBatch out = euler_maruyama_reverse(*pre, kSchedule, grid, RandomSource(7, 0), 50000, 1);
    const double se = std::sqrt(out.variance()[0] / out.size());
    CHECK(std::abs(out.mean()[0] - 3.0) < 3.0 * se);
}

TEST_CASE("integrator rejects bad inputs and non-finite drifts") {
    const auto pre = pretrained_drift(GaussianMixture::standard(2), kSchedule);
    const TimeGrid grid = TimeGrid::uniform(8, 1.0);
    CHECK_THROWS_AS(euler_maruyama_reverse(*pre, kSchedule, grid, RandomSource(1, 0), 0, 2),
                    std::invalid_argument);
    CHECK_THROWS_AS(euler_maruyama_reverse(*pre, kSchedule, grid, RandomSource(1, 0), 4, 1),
                    std::invalid_argument);

    const auto bad = drift_from_score(
        [](std::span<const double>, double t, std::span<double> out) {
            for (double& v : out) v = t < 0.5 ? std::numeric_limits<double>::quiet_NaN() : 0.0;
        },
        1, kSchedule, "broken");
    try {
        euler_maruyama_reverse(*bad, kSchedule, grid, RandomSource(1, 0), 4, 1);
        FAIL("expected IntegrationError");
    } catch (const IntegrationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("t=") != std::string::npos);
        CHECK(msg.find("x=") != std::string::npos);
    }
}

TEST_CASE("fixed seeds reproduce bit-identical batches") {
    const auto pre = pretrained_drift(GaussianMixture::standard(2), kSchedule);
    const TimeGrid grid = TimeGrid::uniform(64, 1.0);
    const SampleBatch a = euler_maruyama_reverse(*pre, kSchedule, grid, RandomSource(11, 3), 512, 2);
    const SampleBatch b = euler_maruyama_reverse(*pre, kSchedule, grid, RandomSource(11, 3), 512, 2);
    CHECK(a.data == b.data);
}

TEST_CASE("terminal error shrinks as the grid refines") {
    const GaussianMixture prior = GaussianMixture::single({3.0}, Mat::identity(1));
    const auto pre = pretrained_drift(prior, kSchedule);
    std::vector<double> dist;
    for (int steps : {50, 100, 200, 400}) {
        const TimeGrid grid = TimeGrid::uniform(steps, 1.0);
        const SampleBatch out =
            euler_maruyama_reverse(*pre, kSchedule, grid, RandomSource(5, 0), 30000, 1);
        dist.push_back(testing_support::w1_to_mixture(out.column(0), prior));
    }
    for (size_t i = 1; i < dist.size(); ++i) CHECK(dist[i] <= dist[i - 1] + 0.003);
}

TEST_CASE("single-trajectory stepping matches the batch integrator") {
    const auto pre = pretrained_drift(GaussianMixture::standard(1), kSchedule);
    const TimeGrid grid = TimeGrid::uniform(32, 1.0);
    const RandomSource base(21, 0);
    const SampleBatch batch = euler_maruyama_reverse(*pre, kSchedule, grid, base, 3, 1);

    for (int traj = 0; traj < 3; ++traj) {
        RandomSource rng = base.substream(traj);
        Vec x{rng.normal()};
        euler_steps_inplace(*pre, kSchedule, grid, rng, x, grid.num_steps(), grid.num_steps());
        CHECK(x[0] == batch.point(traj)[0]);
    }
}
