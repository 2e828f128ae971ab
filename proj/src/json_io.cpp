#include "driftblend/json_io.hpp"

#include <stdexcept>

namespace dblend {

namespace {

Mat mat_from_rows(const json& rows) {
    const int r = static_cast<int>(rows.size());
    if (r == 0) throw std::invalid_argument("matrix: no rows");
    const int c = static_cast<int>(rows[0].size());
    Mat m(r, c);
    for (int i = 0; i < r; ++i) {
        if (static_cast<int>(rows[i].size()) != c)
            throw std::invalid_argument("matrix: ragged rows");
        for (int j = 0; j < c; ++j) m(i, j) = rows[i][j].get<double>();
    }
    return m;
}

json mat_to_rows(const Mat& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows; ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols; ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

json mixture_to_json(const GaussianMixture& m) {
    json j;
    j["weights"] = m.weights();
    json means = json::array();
    json covs = json::array();
    for (int k = 0; k < m.components(); ++k) {
        means.push_back(m.mean(k));
        covs.push_back(mat_to_rows(m.covariance(k)));
    }
    j["means"] = std::move(means);
    j["covariances"] = std::move(covs);
    return j;
}

GaussianMixture mixture_from_json(const json& j) {
    std::vector<double> weights = j.at("weights").get<std::vector<double>>();
    std::vector<Vec> means;
    for (const json& m : j.at("means")) means.push_back(m.get<Vec>());
    std::vector<Mat> covs;
    for (const json& c : j.at("covariances")) covs.push_back(mat_from_rows(c));
    return GaussianMixture(std::move(weights), std::move(means), std::move(covs));
}

json reward_to_json(const RewardSpec& r) {
    json j;
    switch (r.kind()) {
        case RewardSpec::Kind::Linear:
            j["type"] = "linear";
            j["a"] = r.linear_coeff();
            j["b"] = r.offset();
            break;
        case RewardSpec::Kind::Quadratic:
            j["type"] = "quadratic";
            j["A"] = mat_to_rows(r.quadratic_matrix());
            j["a"] = r.linear_coeff();
            j["b"] = r.offset();
            break;
        case RewardSpec::Kind::Blackbox:
            j["type"] = "blackbox";
            j["name"] = r.name();
            break;
    }
    return j;
}

RewardSpec reward_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "linear")
        return RewardSpec::linear(j.at("a").get<Vec>(), j.value("b", 0.0));
    if (type == "quadratic")
        return RewardSpec::quadratic(mat_from_rows(j.at("A")), j.at("a").get<Vec>(),
                                     j.value("b", 0.0));
    if (type == "blackbox") {
        const std::string name = j.at("name").get<std::string>();
        Vec params;
        if (j.contains("params")) params = j.at("params").get<Vec>();
        if (j.contains("target")) params = j.at("target").get<Vec>();
        return blackbox_from_catalog(name, std::move(params));
    }
    throw std::invalid_argument("reward_from_json: unknown type '" + type + "'");
}

json score_model_to_json(const ScoreModel& m) {
    json j;
    j["family"] = m.family() == FeatureFamily::Polynomial ? "polynomial" : "radial_basis";
    j["dim"] = m.dim();
    j["time_bins"] = m.time_bins();
    j["horizon"] = m.horizon();
    if (m.family() == FeatureFamily::Polynomial) {
        j["degree"] = m.degree();
    } else {
        json centers = json::array();
        for (const Vec& c : m.centers()) centers.push_back(c);
        j["centers"] = std::move(centers);
        j["bandwidth"] = m.bandwidth();
    }
    json theta = json::array();
    for (int b = 0; b < m.time_bins(); ++b) theta.push_back(mat_to_rows(m.coefficients(b)));
    j["theta"] = std::move(theta);
    return j;
}

ScoreModel score_model_from_json(const json& j) {
    const std::string family = j.at("family").get<std::string>();
    const int dim = j.at("dim").get<int>();
    const int bins = j.at("time_bins").get<int>();
    const double horizon = j.at("horizon").get<double>();
    ScoreModel m =
        family == "polynomial"
            ? ScoreModel::polynomial(dim, j.at("degree").get<int>(), bins, horizon)
            : ScoreModel::radial_basis(
                  [&] {
                      std::vector<Vec> centers;
                      for (const json& c : j.at("centers")) centers.push_back(c.get<Vec>());
                      return centers;
                  }(),
                  j.at("bandwidth").get<double>(), bins, horizon);
    const json& theta = j.at("theta");
    if (static_cast<int>(theta.size()) != bins)
        throw std::invalid_argument("score_model_from_json: theta bin count mismatch");
    for (int b = 0; b < bins; ++b) {
        Mat th = mat_from_rows(theta[b]);
        if (th.rows != m.feature_count() || th.cols != dim)
            throw std::invalid_argument("score_model_from_json: theta shape mismatch");
        m.coefficients(b) = std::move(th);
    }
    return m;
}

}  // namespace dblend
