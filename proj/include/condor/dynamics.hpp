#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "condor/geometry.hpp"
#include "condor/nn/mlp.hpp"

namespace condor {

enum class GainMode { adaptive, fixed };

/// Layer counts and width of the three networks.
struct Architecture {
    int hidden_width = 300;
    int encoder_layers = 3;
    int decoder_layers = 3;
    int gain_layers = 2;
};

struct ModelConfig {
    int order = 1;
    int dim = 2;        ///< task-state dimensionality n (latent dimensionality too)
    int code_dim = 0;   ///< one-hot motion code width, 0 for a single motion
    double dt = 1.0;    ///< task-space Euler step in seconds
    double latent_dt = 1.0;  ///< Euler step of the latent system
    double alpha_max = 9.997e-2;
    GainMode gain_mode = GainMode::adaptive;
    double fixed_gain = 8e-3;
    Architecture arch;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Encoder ψ, decoder φ and gain network α over a normalized task space.
///
/// The learned field is ẋ = φ(ψ(x ⊕ code)) for first-order models. Second-order
/// models carry position ⊕ velocity and φ outputs the acceleration; the
/// position rate follows from the velocity through the workspace scaling, so the
/// kinematic relation p' = p + v·dt holds exactly in original units.
struct CondorModel {
    ModelConfig config;
    Workspace workspace;
    Vector goal;  ///< normalized task-space goal x_g
    nn::MlpSpec encoder_spec;
    nn::MlpSpec decoder_spec;
    nn::MlpSpec gain_spec;
    nn::ParameterStore encoder;
    nn::ParameterStore decoder;
    nn::ParameterStore gain;  ///< empty in fixed-gain mode

    /// Freshly initialized networks; `goal_original` is in original units.
    static CondorModel create(const ModelConfig& config, const Workspace& workspace, const Vector& goal_original);

    int dim() const { return config.dim; }
    int code_dim() const { return config.code_dim; }
    int decoder_output_dim() const { return config.order == 2 ? config.dim / 2 : config.dim; }

    /// Position-rate coefficients for second-order models: ṗ = v ⊙ scale + offset
    /// in normalized units.
    Vector kinematic_scale() const;
    Vector kinematic_offset() const;

    /// Throws std::invalid_argument when network layouts disagree with the config.
    void check() const;
};

/// Optional post-transform of the task vector field (state, derivative) -> derivative.
/// Reserved for modulation-style extensions; rollouts apply it when set.
using FieldTransform = std::function<Matrix(const Matrix& states, const Matrix& derivatives)>;

// Batched evaluation. States are rows; `codes` is empty when code_dim == 0,
// otherwise either one row (broadcast) or one row per state.

Matrix encode(const CondorModel& model, const Matrix& states, const Matrix& codes = Matrix());
Matrix latent_goal(const CondorModel& model, Eigen::Index rows, const Matrix& codes = Matrix());
Matrix gains(const CondorModel& model, const Matrix& latents);
Matrix latent_dynamics(const CondorModel& model, const Matrix& latents, const Matrix& latent_goals);
Matrix decode(const CondorModel& model, const Matrix& latents);
/// Task-state derivative given the decoder output at each state.
Matrix assemble_derivative(const CondorModel& model, const Matrix& states, const Matrix& decoded);
Matrix task_derivative(const CondorModel& model, const Matrix& states, const Matrix& codes = Matrix());
Matrix euler_step(const CondorModel& model, const Matrix& states, const Matrix& codes = Matrix(),
                  const FieldTransform& transform = nullptr);

/// H+1 batched states under euler_step; throws NumericDivergence on non-finite states.
std::vector<Matrix> rollout_task(const CondorModel& model, const Matrix& starts, int horizon,
                                 const Matrix& codes = Matrix(), const FieldTransform& transform = nullptr);

/// Task rollout of one start as an (H+1) x n matrix.
Matrix rollout_task(const CondorModel& model, const Vector& start, int horizon, const Vector& code = Vector());

/// Paired latent trajectories of one start: ψ along the task rollout and the
/// free latent system from the same start point.
struct RolloutTrace {
    Matrix task_states;   ///< (H+1) x n
    Matrix latent_task;   ///< (H+1) x n
    Matrix latent_free;   ///< (H+1) x n
};

RolloutTrace rollout_latent_pair(const CondorModel& model, const Vector& start, int horizon,
                                 const Vector& code = Vector());

/// Batched free latent rollout from ψ(starts); returns H+1 matrices.
std::vector<Matrix> rollout_latent_free(const CondorModel& model, const Matrix& starts, int horizon,
                                        const Matrix& codes = Matrix());

/// Maps free latent points back to task space with x_{t+1} = clip(x_t + φ(y_t)·dt)
/// (second-order: position follows velocity, velocity follows φ). The output has
/// as many rows as `latent_free`, or the single row x0 when it is empty.
Matrix map_latent_to_task(const CondorModel& model, const Vector& start, const Matrix& latent_free);
/// Batched version over H+1 latent matrices.
std::vector<Matrix> map_latent_to_task(const CondorModel& model, const Matrix& starts,
                                       const std::vector<Matrix>& latent_free);

/// Convex combination of motion codes; weights must lie on the simplex.
Vector interpolate_code(const std::vector<Vector>& codes, const std::vector<double>& weights);

/// One-hot code of width `width` selecting `index`.
Vector one_hot(int width, int index);

// Taped counterparts used for training.

struct BoundModel {
    const CondorModel* model = nullptr;
    nn::Tape* tape = nullptr;
    std::vector<nn::Var> encoder;
    std::vector<nn::Var> decoder;
    std::vector<nn::Var> gain;
};

BoundModel bind(const CondorModel& model, nn::Tape& tape);

/// `codes` must already have one row per state (or be invalid when code_dim == 0).
nn::Var encode(const BoundModel& bm, const nn::Var& states, const nn::Var& codes);
nn::Var latent_goal(const BoundModel& bm, Eigen::Index rows, const nn::Var& codes);
nn::Var task_derivative(const BoundModel& bm, const nn::Var& states, const nn::Var& codes);
/// Task derivative at `states` whose encodings `latents` are already on the tape.
nn::Var derivative_from_latent(const BoundModel& bm, const nn::Var& states, const nn::Var& latents);
/// x + ẋ·dt before clipping.
nn::Var euler_unclipped(const BoundModel& bm, const nn::Var& states, const nn::Var& codes);
nn::Var euler_unclipped_from_latent(const BoundModel& bm, const nn::Var& states, const nn::Var& latents);
/// y + α(y) ⊙ (y_g − y)·latent_dt.
nn::Var latent_step(const BoundModel& bm, const nn::Var& latents, const nn::Var& latent_goals);

/// Per-network gradients gathered from a backward sweep.
struct ModelGradients {
    std::vector<Matrix> encoder;
    std::vector<Matrix> decoder;
    std::vector<Matrix> gain;
};

ModelGradients collect_gradients(const BoundModel& bm, const nn::Gradients& grads);

/// Expands `codes` (empty, one row, or `rows` rows) to exactly `rows` rows.
Matrix expand_codes(const CondorModel& model, const Matrix& codes, Eigen::Index rows);

}  // namespace condor
