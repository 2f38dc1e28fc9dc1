#include "condor/nn/adamw.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "condor/errors.hpp"

namespace condor::nn {

void adamw_step(ParameterStore& params, const std::vector<Matrix>& grads, const AdamWConfig& cfg) {
    if (grads.size() != params.size()) throw std::invalid_argument("adamw: gradient count mismatch");
    for (std::size_t i = 0; i < grads.size(); ++i) {
        const Matrix& p = params.value(i);
        if (grads[i].rows() != p.rows() || grads[i].cols() != p.cols())
            throw std::invalid_argument("adamw: gradient shape mismatch for " + params.name(i));
        if (!grads[i].allFinite()) {
            std::ostringstream msg;
            msg << "non-finite gradient for " << params.name(i) << " at optimizer step " << params.step() + 1
                << " (max |g| = " << grads[i].cwiseAbs().maxCoeff() << ")";
            throw NumericDivergence(msg.str());
        }
    }

    const long t = params.step() + 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    const double decay = 1.0 - cfg.learning_rate * cfg.weight_decay;
    auto& m1 = params.first_moments();
    auto& m2 = params.second_moments();
    for (std::size_t i = 0; i < grads.size(); ++i) {
        Matrix& p = params.value(i);
        p *= decay;
        m1[i] = cfg.beta1 * m1[i] + (1.0 - cfg.beta1) * grads[i];
        m2[i] = cfg.beta2 * m2[i] + (1.0 - cfg.beta2) * grads[i].cwiseAbs2();
        const auto denom = (m2[i].array() / bc2).sqrt() + cfg.epsilon;
        p.array() -= cfg.learning_rate * (m1[i].array() / bc1) / denom;
    }
    params.set_step(t);
}

}  // namespace condor::nn
