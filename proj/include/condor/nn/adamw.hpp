#pragma once

#include <vector>

#include "condor/nn/mlp.hpp"

namespace condor::nn {

struct AdamWConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 1e-4;
};

/// One bias-corrected AdamW update. The decoupled decay p *= (1 - lr * wd) is
/// applied first, then the moment update.
///
/// Throws NumericDivergence (and leaves `params` untouched) when any gradient
/// entry is not finite; throws std::invalid_argument on shape mismatch.
void adamw_step(ParameterStore& params, const std::vector<Matrix>& grads, const AdamWConfig& cfg);

}  // namespace condor::nn
