#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "driftblend/blend.hpp"
#include "driftblend/integrator.hpp"
#include "driftblend/json_io.hpp"
#include "driftblend/score_fit.hpp"
#include "driftblend/tilt.hpp"
#include "test_support.hpp"

using namespace dblend;
namespace ts = testing_support;

namespace {
const NoiseSchedule kSchedule(0.1, 20.0, 1.0);

SampleBatch draws_from(const GaussianMixture& m, int n, uint64_t seed) {
    RandomSource rng(seed, 0);
    std::vector<double> data(static_cast<size_t>(n) * m.dim());
    for (int i = 0; i < n; ++i)
        m.sample(rng, {data.data() + static_cast<size_t>(i) * m.dim(),
                       static_cast<size_t>(m.dim())});
    return SampleBatch(m.dim(), 0.0, std::move(data));
}

std::vector<Vec> centers_1d(double lo, double hi, int n) {
    std::vector<Vec> c;
    for (int i = 0; i < n; ++i) c.push_back({lo + (hi - lo) * i / (n - 1)});
    return c;
}
}  // namespace

TEST_CASE("dsm on standard normal recovers the linear score") {
    const SampleBatch data = draws_from(GaussianMixture::standard(1), 50000, 11);
    ScoreModel model = ScoreModel::polynomial(1, 1, 16, 1.0);
    TrainConfig cfg;
    cfg.num_samples = 50000;
    cfg.time_bins = 16;
    const TrainReport rep = dsm_train(model, data, kSchedule, cfg, RandomSource(3, 0));
    CHECK(rep.objective > 0.0);
    // features are [1, x]; the slope row of theta should be near -1 in
    // every bin (score of the stationary marginal is -x at all t)
    for (int b = 0; b < model.time_bins(); ++b)
        CHECK(model.coefficients(b)(1, 0) == doctest::Approx(-1.0).epsilon(0.05));
}

TEST_CASE("dsm rejects empty data and bad config") {
    ScoreModel model = ScoreModel::polynomial(1, 1, 8, 1.0);
    TrainConfig cfg;
    cfg.time_bins = 8;
    CHECK_THROWS_AS(dsm_train(model, SampleBatch(1, 0.0, {}), kSchedule, cfg, RandomSource(1, 0)),
                    std::invalid_argument);
    const SampleBatch tiny = draws_from(GaussianMixture::standard(1), 10, 1);
    TrainConfig bad = cfg;
    bad.ridge = 0.0;
    CHECK_THROWS_AS(dsm_train(model, tiny, kSchedule, bad, RandomSource(1, 0)),
                    std::invalid_argument);
}

TEST_CASE("singular normal equations fall back to a larger ridge with a warning") {
    // duplicated centers make the feature columns linearly dependent; a
    // vanishing ridge cannot regularize them, so the solver must bump it
    ScoreModel model = ScoreModel::radial_basis({{0.0}, {0.0}, {1.0}}, 1.0, 2, 1.0);
    TrainConfig cfg;
    cfg.num_samples = 4000;
    cfg.time_bins = 2;
    cfg.ridge = 1e-300;
    const SampleBatch data = draws_from(GaussianMixture::standard(1), 4000, 55);
    const TrainReport rep = dsm_train(model, data, kSchedule, cfg, RandomSource(56, 0));
    CHECK(rep.ridge_bumps > 0);
    CHECK_FALSE(rep.warnings.empty());
    CHECK(rep.warnings[0].find("ridge raised") != std::string::npos);
}

TEST_CASE("richer feature family fits a mixture better") {
    const GaussianMixture mix({0.5, 0.5}, {{-2.0}, {2.0}}, {Mat::identity(1), Mat::identity(1)});
    const SampleBatch data = draws_from(mix, 40000, 21);
    TrainConfig cfg;
    cfg.num_samples = 60000;
    cfg.time_bins = 12;
    cfg.ridge = 1e-5;

    ScoreModel poly = ScoreModel::polynomial(1, 1, 12, 1.0);
    dsm_train(poly, data, kSchedule, cfg, RandomSource(4, 0));
    ScoreModel rbf = ScoreModel::radial_basis(centers_1d(-6.0, 6.0, 13), 1.0, 12, 1.0);
    dsm_train(rbf, data, kSchedule, cfg, RandomSource(4, 0));

    const std::vector<double> ts{0.2, 0.5, 0.8};
    const double mse_poly = score_mse(poly, mix, kSchedule, ts);
    const double mse_rbf = score_mse(rbf, mix, kSchedule, ts);
    CHECK(mse_rbf < mse_poly);
}

TEST_CASE("score_mse diagnostics") {
    SUBCASE("exactly representable score measures zero") {
        ScoreModel model = ScoreModel::polynomial(1, 1, 4, 1.0);
        for (int b = 0; b < 4; ++b) model.coefficients(b)(1, 0) = -1.0;  // s(x) = -x
        const double mse = score_mse(model, GaussianMixture::standard(1), kSchedule, {0.3, 0.7});
        CHECK(mse < 1e-10);
    }
    SUBCASE("zero model against the standard normal measures E[x^2] = 1") {
        const ScoreModel zero = ScoreModel::polynomial(1, 1, 4, 1.0);
        const double mse = score_mse(zero, GaussianMixture::standard(1), kSchedule, {0.2, 0.5, 0.9});
        CHECK(mse == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("more training data reduces the error") {
        const GaussianMixture mix({0.5, 0.5}, {{-1.5}, {1.5}}, {Mat::identity(1), Mat::identity(1)});
        TrainConfig cfg;
        cfg.time_bins = 8;
        cfg.ridge = 1e-5;
        ScoreModel small = ScoreModel::radial_basis(centers_1d(-5.0, 5.0, 9), 1.2, 8, 1.0);
        cfg.num_samples = 2000;
        dsm_train(small, draws_from(mix, 2000, 5), kSchedule, cfg, RandomSource(6, 0));
        ScoreModel large = small;
        cfg.num_samples = 20000;
        dsm_train(large, draws_from(mix, 20000, 5), kSchedule, cfg, RandomSource(6, 0));
        const std::vector<double> ts{0.3, 0.6};
        CHECK(score_mse(large, mix, kSchedule, ts) < score_mse(small, mix, kSchedule, ts));
    }
}

TEST_CASE("parameter averaging") {
    const GaussianMixture a = GaussianMixture::single({1.0}, Mat::identity(1));
    const GaussianMixture b = GaussianMixture::single({-1.0}, Mat::identity(1));
    TrainConfig cfg;
    cfg.num_samples = 20000;
    cfg.time_bins = 8;
    ScoreModel ma = ScoreModel::polynomial(1, 1, 8, 1.0);
    ScoreModel mb = ma;
    dsm_train(ma, draws_from(a, 20000, 31), kSchedule, cfg, RandomSource(7, 0));
    dsm_train(mb, draws_from(b, 20000, 32), kSchedule, cfg, RandomSource(8, 0));
    const std::vector<ScoreModel> models{ma, mb};

    SUBCASE("one-hot returns that model") {
        const ScoreModel avg = average_params(models, PreferenceWeights::one_hot(2, 1));
        for (int bin = 0; bin < 8; ++bin) CHECK(avg.coefficients(bin).a == mb.coefficients(bin).a);
    }
    SUBCASE("averaging identical models changes nothing") {
        const std::vector<ScoreModel> same{ma, ma};
        const ScoreModel avg = average_params(same, PreferenceWeights({0.4, 0.6}));
        for (int bin = 0; bin < 8; ++bin)
            for (size_t e = 0; e < avg.coefficients(bin).a.size(); ++e)
                CHECK(avg.coefficients(bin).a[e] ==
                      doctest::Approx(ma.coefficients(bin).a[e]).epsilon(1e-15));
    }
    SUBCASE("averaging is affine in w, parameter-wise") {
        const ScoreModel avg = average_params(models, PreferenceWeights({0.3, 0.7}));
        for (int bin = 0; bin < 8; ++bin)
            for (size_t e = 0; e < avg.coefficients(bin).a.size(); ++e)
                CHECK(avg.coefficients(bin).a[e] ==
                      doctest::Approx(0.3 * ma.coefficients(bin).a[e] +
                                      0.7 * mb.coefficients(bin).a[e])
                          .epsilon(1e-15));
    }
    SUBCASE("averaged parameters induce the blended drift for linear-in-theta families") {
        const PreferenceWeights w({0.35, 0.65});
        const ScoreModel avg = average_params(models, w);
        const auto avg_drift = drift_from_model(avg, kSchedule, "rs");
        const auto blend = db_mpa({drift_from_model(ma, kSchedule, "a"),
                                   drift_from_model(mb, kSchedule, "b")},
                                  w);
        RandomSource rng(9, 0);
        for (int i = 0; i < 40; ++i) {
            const Vec x{3.0 * rng.normal()};
            const double t = 0.999 * rng.uniform() + 5e-4;
            CHECK(avg_drift->eval(x, t)[0] == doctest::Approx(blend->eval(x, t)[0]).epsilon(1e-12));
        }
    }
    SUBCASE("architecture mismatch is rejected") {
        const ScoreModel other = ScoreModel::polynomial(1, 2, 8, 1.0);
        const std::vector<ScoreModel> mixed{ma, other};
        CHECK_THROWS_AS(average_params(mixed, PreferenceWeights({0.5, 0.5})),
                        std::invalid_argument);
    }
}

TEST_CASE("learned fine-tuned pipeline lands near the tilt oracle") {
    const GaussianMixture prior({0.5, 0.5}, {{-1.0}, {1.0}}, {Mat::identity(1), Mat::identity(1)});
    const TiltResult tilt = tilt_linear(prior, Vec{1.0}, 0.0, 1.0);
    const SampleBatch data = draws_from(tilt.tilted, 50000, 41);
    ScoreModel model = ScoreModel::radial_basis(centers_1d(-6.0, 6.0, 13), 1.2, 24, 1.0);
    TrainConfig cfg;
    cfg.num_samples = 100000;
    cfg.time_bins = 24;
    cfg.ridge = 1e-4;
    dsm_train(model, data, kSchedule, cfg, RandomSource(13, 0));
    const auto drift = drift_from_model(model, kSchedule, "learned");
    const TimeGrid grid = TimeGrid::uniform(500, 1.0);
    const SampleBatch out = euler_maruyama_reverse(*drift, kSchedule, grid, RandomSource(14, 0), 50000, 1);
    CHECK(ts::w1_to_mixture(out.column(0), tilt.tilted) < 0.1);
}

TEST_CASE("score model json round trip") {
    RandomSource rng(15, 0);
    ScoreModel rbf = ScoreModel::radial_basis(centers_1d(-3.0, 3.0, 5), 0.9, 6, 1.0);
    ScoreModel poly = ScoreModel::polynomial(2, 2, 4, 1.0);
    for (int b = 0; b < 6; ++b)
        for (double& v : rbf.coefficients(b).a) v = rng.normal();
    for (int b = 0; b < 4; ++b)
        for (double& v : poly.coefficients(b).a) v = rng.normal();

    const ScoreModel rbf_back = score_model_from_json(score_model_to_json(rbf));
    REQUIRE(rbf_back.same_architecture(rbf));
    for (int i = 0; i < 20; ++i) {
        const Vec x{4.0 * rng.normal()};
        const double t = rng.uniform();
        CHECK(rbf_back.evaluate(x, t)[0] == doctest::Approx(rbf.evaluate(x, t)[0]).epsilon(1e-14));
    }
    const ScoreModel poly_back = score_model_from_json(score_model_to_json(poly));
    REQUIRE(poly_back.same_architecture(poly));
    for (int i = 0; i < 20; ++i) {
        const Vec x{2.0 * rng.normal(), 2.0 * rng.normal()};
        const double t = rng.uniform();
        for (int j = 0; j < 2; ++j)
            CHECK(poly_back.evaluate(x, t)[j] ==
                  doctest::Approx(poly.evaluate(x, t)[j]).epsilon(1e-14));
    }
}
