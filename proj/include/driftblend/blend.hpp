#pragma once

#include <vector>

#include "driftblend/drift.hpp"
#include "driftblend/rewards.hpp"

namespace dblend {

/// Multi-preference drift blend: evaluates sum_i w_i drifts[i](x, t) at
/// every step, with no model mutation or refitting. All children must share
/// dimension and horizon.
DriftPtr db_mpa(std::vector<DriftPtr> drifts, const PreferenceWeights& w);

/// Gated variant: above t_gate the pre-trained drift is used unchanged and
/// blending only applies to the late (small-t) steps. t_gate >= horizon
/// reproduces plain db_mpa.
DriftPtr db_mpa_gated(std::vector<DriftPtr> drifts, const PreferenceWeights& w, DriftPtr pre,
                      double t_gate);

/// KL-strength blend (1 - lambda) pre + lambda finetuned; lambda >= 0 and
/// may exceed 1 (extrapolation past the fine-tuned model).
DriftPtr db_kla(DriftPtr pre, DriftPtr finetuned, double lambda);

}  // namespace dblend
