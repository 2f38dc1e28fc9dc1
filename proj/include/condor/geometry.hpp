#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace condor {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A set of demonstrations of one reaching motion, stored in original units.
///
/// Each trajectory is a (T_i x position_dim) matrix of positions sampled every
/// `dt` seconds. For second-order motions the task state is position ⊕ velocity,
/// so `dim` is twice the position dimensionality.
struct MotionDataset {
    std::string name;
    double dt = 1.0;
    int dim = 0;
    int order = 1;
    std::vector<Matrix> trajectories;
    std::optional<Vector> goal;

    int position_dim() const { return order == 2 ? dim / 2 : dim; }

    /// Throws std::invalid_argument when an invariant is violated.
    void validate() const;

    /// Full task states of trajectory i, one per row (T_i x dim).
    Matrix states(std::size_t i) const;

    /// Explicit goal if present, otherwise derive_goal().
    Vector resolved_goal() const;
};

/// Axis-aligned hypercube in original units that maps onto [-1, 1]^n.
class Workspace {
public:
    Workspace() = default;
    Workspace(Vector lower, Vector upper);

    const Vector& lower() const { return lower_; }
    const Vector& upper() const { return upper_; }
    int dim() const { return static_cast<int>(lower_.size()); }
    Vector span() const { return upper_ - lower_; }
    Vector center() const { return 0.5 * (upper_ + lower_); }
    Vector half_span() const { return 0.5 * (upper_ - lower_); }

    Vector normalize(const Vector& x) const;
    Vector denormalize(const Vector& z) const;
    /// Row-wise versions; each row is one state.
    Matrix normalize_rows(const Matrix& x) const;
    Matrix denormalize_rows(const Matrix& z) const;

    /// Converts a distance in original units to normalized units using the
    /// mean half-span of the first `dims` dimensions (all when dims <= 0).
    double to_normalized_length(double length, int dims = 0) const;

private:
    Vector lower_;
    Vector upper_;
};

Workspace fit_workspace(const MotionDataset& dataset, double padding = 0.15,
                        std::vector<std::string>* warnings = nullptr);

/// Workspace covering several datasets that share a task space.
Workspace fit_workspace(const std::vector<MotionDataset>& datasets, double padding = 0.15,
                        std::vector<std::string>* warnings = nullptr);

/// Componentwise clamp to [-1, 1].
Vector clip_to_workspace(const Vector& z);
Matrix clip_rows_to_workspace(const Matrix& z);

/// Forward differences with a terminal zero velocity (the demonstration ends at rest).
Matrix estimate_derivatives(const Matrix& positions, double dt);

/// Mean of the final positions; zero velocity for second-order datasets.
Vector derive_goal(const MotionDataset& dataset);

}  // namespace condor
