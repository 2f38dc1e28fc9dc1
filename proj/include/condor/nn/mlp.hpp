#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "condor/nn/tape.hpp"

namespace condor::nn {

/// Named parameter matrices plus the optimizer state that belongs to them.
class ParameterStore {
public:
    void add(std::string name, Matrix value);

    std::size_t size() const { return values_.size(); }
    std::size_t scalar_count() const;
    const std::string& name(std::size_t i) const { return names_.at(i); }
    const Matrix& value(std::size_t i) const { return values_.at(i); }
    Matrix& value(std::size_t i) { return values_.at(i); }
    const std::vector<Matrix>& values() const { return values_; }

    /// First/second moment accumulators, shape-matched to the values.
    std::vector<Matrix>& first_moments() { return m1_; }
    std::vector<Matrix>& second_moments() { return m2_; }
    const std::vector<Matrix>& first_moments() const { return m1_; }
    const std::vector<Matrix>& second_moments() const { return m2_; }
    long step() const { return step_; }
    void set_step(long s) { step_ = s; }

    /// Flat view over all scalars, in parameter order (for finite differences).
    double& scalar(std::size_t flat_index);
    double scalar(std::size_t flat_index) const;

    /// Leaves for every parameter on `tape`, in parameter order.
    std::vector<Var> bind(Tape& tape) const;
    /// Gradient per parameter; zeros where the tape recorded none.
    std::vector<Matrix> collect(const Gradients& grads, const std::vector<Var>& bound) const;

private:
    std::vector<std::string> names_;
    std::vector<Matrix> values_;
    std::vector<Matrix> m1_;
    std::vector<Matrix> m2_;
    long step_ = 0;
};

enum class OutputActivation { linear, sigmoid };

/// Dense stack: every layer but the last is Linear -> LayerNorm -> GELU;
/// the last layer is Linear followed by `output`.
struct MlpSpec {
    int input_dim = 1;
    int hidden_width = 8;
    int layers = 3;
    int output_dim = 1;
    OutputActivation output = OutputActivation::linear;

    void validate() const;
};

/// Uniform fan-in initialization, weights and biases in ±sqrt(1/fan_in).
ParameterStore init_mlp(const MlpSpec& spec, std::mt19937_64& rng);

/// Checks that `params` has exactly the layout init_mlp produces for `spec`.
void check_layout(const MlpSpec& spec, const ParameterStore& params);

/// Taped forward pass; `bound` comes from ParameterStore::bind.
Var mlp_forward(const MlpSpec& spec, const std::vector<Var>& bound, const Var& input);

/// Untaped forward pass, numerically identical to mlp_forward.
Matrix mlp_eval(const MlpSpec& spec, const ParameterStore& params, const Matrix& input);

}  // namespace condor::nn
