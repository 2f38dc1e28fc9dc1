#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "condor/dynamics.hpp"
#include "condor/geometry.hpp"
#include "condor/learning.hpp"

namespace condor {

// ---------------------------------------------------------------------------
// Trajectory metrics. Trajectories are matrices with one point per row.

/// sqrt(mean_t ‖a_t − b_t‖²); lengths must match.
double trajectory_rmse(const Matrix& a, const Matrix& b);
/// Dynamic time warping with Euclidean local cost and match/insert/delete steps.
double dtwd(const Matrix& a, const Matrix& b);
/// Discrete Fréchet distance.
double frechet(const Matrix& a, const Matrix& b);

// ---------------------------------------------------------------------------
// Stability sweep

struct StabilityEvalConfig {
    int steps = 2000;      ///< L
    int starts = 1225;     ///< P
    double epsilon = 1.0;  ///< convergence radius in original position units
    std::uint64_t seed = 0;

    void validate() const;
};

/// Epsilon in original units equal to `fraction` of the mean position span.
double epsilon_from_span_fraction(const Workspace& workspace, int position_dim, double fraction);

/// Initial states of a sweep: a ceil(sqrt(P))² grid over [-1, 1]² for n = 2,
/// otherwise P seeded uniform samples over [-1, 1]^n.
Matrix sweep_starts(int dim, int count, std::uint64_t seed);

struct SweepResult {
    double unsuccessful_fraction = 0.0;
    int failures = 0;
    int trials = 0;
    double epsilon_normalized = 0.0;
    Vector final_distances;  ///< normalized distance to the goal per start
};

/// Rolls every start out for L steps and counts finals farther than epsilon
/// from the goal (full normalized state). Non-finite states count as failures.
SweepResult stability_sweep(const CondorModel& model, const StabilityEvalConfig& cfg, const Vector& code = Vector());

/// Same, from explicit normalized starts. `transform` optionally replaces the
/// model's derivative (see euler_step).
SweepResult stability_sweep(const CondorModel& model, const Matrix& starts, int steps, double epsilon_normalized,
                            const Vector& code = Vector(), const FieldTransform& transform = nullptr);

// ---------------------------------------------------------------------------
// Accuracy against demonstrations

struct DemoScore {
    double rmse = 0.0;
    double dtwd = 0.0;
    double frechet = 0.0;
    double final_distance = 0.0;  ///< rollout end to goal
};

struct AccuracyReport {
    std::vector<DemoScore> per_demo;  ///< original position units
    double rmse = 0.0;
    double dtwd = 0.0;
    double frechet = 0.0;
    double goal_precision = 0.0;  ///< mean final distance to the goal, original units
};

/// Rolls the model out from each demonstration's first state for as many
/// steps as the demonstration has and compares positions in original units.
AccuracyReport evaluate_accuracy(const CondorModel& model, const MotionDataset& dataset,
                                 const Vector& code = Vector());

/// Mean distance between each trajectory's last point and `goal`.
double goal_precision(const std::vector<Matrix>& rollouts, const Vector& goal);

// ---------------------------------------------------------------------------
// Diffeomorphism mismatch

struct MismatchConfig {
    int starts = 100;
    int horizon = 0;  ///< 0 means the longest demonstration length
    int points = 10;  ///< curve samples at fractions k/points
    std::uint64_t seed = 0;
};

struct MismatchCurve {
    std::vector<double> fractions;
    std::vector<double> mean;
    std::vector<double> stddev;
};

/// Accumulated distance between the task rollout and the free latent
/// trajectory mapped back to task space, sampled at length fractions.
/// Errors are in normalized units.
MismatchCurve mismatch_error(const CondorModel& model, const Matrix& starts, int horizon,
                             const std::vector<double>& fractions, const Vector& code = Vector());
MismatchCurve mismatch_error(const CondorModel& model, const MismatchConfig& cfg, const Vector& code = Vector());

/// RMSE between y^L_{1:N} and y^T_{1:N} along demonstration-matched rollouts.
double latent_mismatch_rmse(const CondorModel& model, const MotionDataset& dataset, const Vector& code = Vector());

// ---------------------------------------------------------------------------
// Hyperparameter objective and search

inline constexpr double kGammaStable = 0.48;
inline constexpr double kGammaGoal = 3.5;

double hyper_objective(double accuracy, double stable, double goal, double gamma_stable = kGammaStable,
                       double gamma_goal = kGammaGoal);

/// Objective of a model on its demonstrations, computed in normalized units:
/// rollout RMSE, latent mismatch RMSE and goal precision.
double model_hyper_objective(const CondorModel& model, const std::vector<MotionDataset>& datasets,
                             double gamma_stable = kGammaStable, double gamma_goal = kGammaGoal);

enum class ParamScale { linear, log };

struct ParamRange {
    std::string name;
    double low = 0.0;
    double high = 0.0;
    ParamScale scale = ParamScale::linear;
    bool integer = false;
};

struct SearchSpace {
    std::vector<ParamRange> params;
    void validate() const;
};

using Assignment = std::map<std::string, double>;

Assignment sample_assignment(const SearchSpace& space, std::mt19937_64& rng);

struct PruneConfig {
    bool enabled = true;
    int min_completed = 3;  ///< completed trials needed before pruning at a checkpoint
    /// Intermediate values above this are pruned regardless of peers.
    double threshold = std::numeric_limits<double>::infinity();
};

/// Lets a running trial report intermediate objectives. report() returns
/// false when the trial should stop (pruned).
class TrialReporter {
public:
    virtual ~TrialReporter() = default;
    virtual bool report(long step, double value) = 0;
};

struct TrialRecord {
    int index = 0;
    Assignment params;
    double objective = 0.0;
    bool pruned = false;
    long pruned_at = -1;  ///< checkpoint step at which the trial was pruned
    bool failed = false;
    std::string note;
};

struct SearchResult {
    Assignment best;
    double best_objective = 0.0;
    int best_index = -1;
    bool best_is_partial = false;
    std::vector<TrialRecord> trials;
    std::vector<std::string> warnings;
};

/// Objective of one trial; throwing marks the trial failed.
using TrialFn = std::function<double(const Assignment&, TrialReporter&)>;

/// Seeded random search with median pruning against completed trials.
SearchResult random_search(const SearchSpace& space, int budget, const PruneConfig& prune, std::uint64_t seed,
                           const TrialFn& trial);

/// Applies a named assignment onto a training config. Unknown names throw.
TrainConfig apply_assignment(TrainConfig base, const Assignment& params);

struct TrainingSearchResult {
    TrainConfig best_config;
    SearchResult search;
};

/// Tunes `base` on `datasets`, checking model_hyper_objective every
/// `check_every` iterations for pruning.
TrainingSearchResult tune_training(const SearchSpace& space, int budget, const PruneConfig& prune,
                                   const std::vector<MotionDataset>& datasets, const TrainConfig& base,
                                   long check_every, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Reports

struct EvalConfig {
    StabilityEvalConfig stability;
    double epsilon_span_fraction = 0.01;  ///< used when stability.epsilon <= 0
    MismatchConfig mismatch;
    double gamma_stable = kGammaStable;
    double gamma_goal = kGammaGoal;
};

struct EvalReport {
    double unsuccessful_fraction = 0.0;
    int sweep_failures = 0;
    int sweep_trials = 0;
    double epsilon = 0.0;  ///< original units
    AccuracyReport accuracy;
    MismatchCurve mismatch_curve;
    double latent_mismatch = 0.0;
    double hyper_objective = 0.0;
};

EvalReport evaluate(const CondorModel& model, const MotionDataset& dataset, const EvalConfig& cfg,
                    const Vector& code = Vector());

}  // namespace condor
