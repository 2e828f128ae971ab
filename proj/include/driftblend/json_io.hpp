#pragma once

#include <json.hpp>

#include "driftblend/gaussian_mixture.hpp"
#include "driftblend/rewards.hpp"
#include "driftblend/score_fit.hpp"

namespace dblend {

using json = nlohmann::json;

/// {"weights": [...], "means": [[...]], "covariances": [[[...], ...], ...]}
json mixture_to_json(const GaussianMixture& m);
GaussianMixture mixture_from_json(const json& j);

/// {"type": "linear"|"quadratic"|"blackbox", ...}; blackbox rewards are
/// resolved by name from the built-in catalog.
json reward_to_json(const RewardSpec& r);
RewardSpec reward_from_json(const json& j);

json score_model_to_json(const ScoreModel& m);
ScoreModel score_model_from_json(const json& j);

}  // namespace dblend
