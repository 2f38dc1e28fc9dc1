#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "condor/dynamics.hpp"
#include "condor/geometry.hpp"
#include "condor/nn/adamw.hpp"
#include "condor/nn/tape.hpp"

namespace condor {

enum class LossVariant { pairwise, triplet, bc_only };

std::string to_string(LossVariant v);
LossVariant loss_variant_from_string(const std::string& s);

/// Training hyperparameters. Defaults are the optimized CONDOR values with the
/// AdamW settings used for every variant.
struct TrainConfig {
    double lambda_stable = 9.3e-2;
    double margin = 3.334e-2;
    int imitation_window = 14;
    int stability_window = 1;
    int imitation_batch = 250;
    int stability_batch = 250;
    double alpha_max = 9.997e-2;
    long iterations = 40000;
    double learning_rate = 4.855e-4;
    /// Cosine-anneal the step size to learning_rate * final_lr_fraction by the
    /// last iteration. 1 keeps it constant.
    double final_lr_fraction = 1.0;
    double weight_decay = 1e-4;
    LossVariant loss_variant = LossVariant::pairwise;
    GainMode gain_mode = GainMode::adaptive;
    double fixed_gain = 2.470e-3;
    Architecture arch;
    double padding = 0.15;
    long log_every = 100;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument on a non-positive or inconsistent field.
    void validate() const;
    double learning_rate_at(long iteration) const;
};

/// Demonstration in normalized coordinates with its motion code.
struct Demonstration {
    Matrix states;  ///< T x n
    Vector code;    ///< empty for single-motion training
};

/// Everything training needs from one or more datasets sharing a task space.
/// Motion i gets the one-hot code e_i when more than one dataset is given.
struct TrainingSet {
    std::vector<Demonstration> demos;
    Workspace workspace;
    Vector goal;  ///< original units
    int order = 1;
    int dim = 0;
    int code_dim = 0;
    double dt = 1.0;

    static TrainingSet build(const std::vector<MotionDataset>& datasets, double padding = 0.15,
                             std::vector<std::string>* warnings = nullptr);
};

/// Start state and the demonstrated states that follow it.
struct ImitationWindow {
    Vector start;     ///< x_{t'}
    Matrix targets;   ///< x*_{t'+1 .. t'+h}, one per row (h <= H_i)
    Vector code;
};

std::vector<ImitationWindow> sample_imitation_batch(const TrainingSet& data, int batch, int window,
                                                    std::mt19937_64& rng);

/// Start states uniform over [-1, 1]^n plus codes uniform over the simplex.
struct StabilityBatch {
    Matrix starts;  ///< B x n
    Matrix codes;   ///< B x c (c may be 0)
};

StabilityBatch sample_stability_batch(const TrainingSet& data, int batch, std::mt19937_64& rng);

/// Multi-step behavioral-cloning loss: squared residuals of the recursive
/// (clipped) prediction against the window targets, divided by the number of
/// residual terms.
nn::Var imitation_loss(const BoundModel& bm, const std::vector<ImitationWindow>& batch);

/// Per-row pairwise contrastive term ‖yL−yT‖² + max(0, m − ‖yT − yT_prev‖)².
nn::Var pairwise_term(const nn::Var& latent_free, const nn::Var& latent_task, const nn::Var& latent_task_prev,
                      double margin);
/// Per-row triplet term max(0, ‖yT−yL‖² − ‖yT − yT_prev‖² + m).
nn::Var triplet_term(const nn::Var& latent_free, const nn::Var& latent_task, const nn::Var& latent_task_prev,
                     double margin);

/// Contrastive stability loss over `window` steps, divided by B·window.
nn::Var stability_loss(const BoundModel& bm, const StabilityBatch& batch, int window, double margin,
                       LossVariant variant);

struct LossParts {
    nn::Var imitation;
    nn::Var stability;  ///< invalid for bc_only
    nn::Var total;
};

LossParts total_loss(const BoundModel& bm, const std::vector<ImitationWindow>& imitation,
                     const StabilityBatch& stability, const TrainConfig& config);

/// Model configuration implied by a training set and hyperparameters.
ModelConfig model_config_for(const TrainingSet& data, const TrainConfig& config);

struct HistoryRow {
    long iteration = 0;
    double loss_il = 0.0;
    double loss_stable = 0.0;
    double loss_total = 0.0;
};

struct TrainResult {
    CondorModel model;  ///< last good parameters
    std::vector<HistoryRow> history;
    long iterations_done = 0;
    bool diverged = false;
    bool stopped_early = false;
    std::string diagnostics;
};

/// Called every `every` iterations with the current model; returning false
/// stops training (used for pruning).
struct TrainMonitor {
    long every = 0;
    std::function<bool(long iteration, const CondorModel& model)> callback;
};

/// Seeded AdamW loop over total_loss. A non-finite loss or gradient stops
/// training and returns the last good model with `diverged` set.
TrainResult train(const TrainingSet& data, const TrainConfig& config, const TrainMonitor& monitor = {});

/// Same, starting from a given model.
TrainResult train(const TrainingSet& data, const TrainConfig& config, CondorModel initial,
                  const TrainMonitor& monitor = {});

/// Runs one optimizer step on `model`; returns the loss values evaluated before it.
HistoryRow train_step(CondorModel& model, const TrainingSet& data, const TrainConfig& config, std::mt19937_64& rng,
                      long iteration);

}  // namespace condor
