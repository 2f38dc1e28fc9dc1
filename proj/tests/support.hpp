#pragma once

#include <random>

#include "condor/dynamics.hpp"
#include "condor/learning.hpp"

namespace condor::testing {

/// Small randomly initialized model over the unit workspace [-1, 1]^n.
inline CondorModel tiny_model(int dim, int order, int width, std::uint64_t seed, int code_dim = 0,
                              GainMode mode = GainMode::adaptive) {
    ModelConfig cfg;
    cfg.dim = dim;
    cfg.order = order;
    cfg.code_dim = code_dim;
    cfg.dt = 0.1;
    cfg.alpha_max = 0.1;
    cfg.gain_mode = mode;
    cfg.fixed_gain = 0.05;
    cfg.arch.hidden_width = width;
    cfg.seed = seed;
    const Workspace ws(-Vector::Ones(dim), Vector::Ones(dim));
    return CondorModel::create(cfg, ws, Vector::Constant(dim, 0.1));
}

/// Sets every weight of an MLP store to zero and every bias of the last layer to `bias`.
inline void zero_network(nn::ParameterStore& store, const Vector& bias) {
    for (std::size_t i = 0; i < store.size(); ++i) {
        const std::string& name = store.name(i);
        if (name.find("ln_gamma") != std::string::npos) continue;
        store.value(i).setZero();
    }
    store.value(store.size() - 1) = bias.transpose();
}

/// Flat list of every trainable scalar as (store, index) pairs.
struct ScalarRef {
    nn::ParameterStore* store;
    std::size_t index;
};

inline std::vector<ScalarRef> all_scalars(CondorModel& m) {
    std::vector<ScalarRef> out;
    for (auto* s : {&m.encoder, &m.decoder, &m.gain})
        for (std::size_t i = 0; i < s->scalar_count(); ++i) out.push_back({s, i});
    return out;
}

}  // namespace condor::testing
