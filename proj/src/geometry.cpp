#include "condor/geometry.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace condor {

void MotionDataset::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dataset dt must be positive");
    if (order != 1 && order != 2) throw std::invalid_argument("dataset order must be 1 or 2");
    if (dim <= 0) throw std::invalid_argument("dataset dim must be positive");
    if (order == 2 && dim % 2 != 0)
        throw std::invalid_argument("second-order dataset needs an even task dimension");
    if (trajectories.empty()) throw std::invalid_argument("dataset has no trajectories");
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        const Matrix& tr = trajectories[i];
        if (tr.cols() != position_dim()) {
            std::ostringstream msg;
            msg << "trajectory " << i << " has " << tr.cols() << " columns, expected " << position_dim();
            throw std::invalid_argument(msg.str());
        }
        if (tr.rows() < 2) {
            std::ostringstream msg;
            msg << "trajectory " << i << " has fewer than 2 samples";
            throw std::invalid_argument(msg.str());
        }
        if (!tr.allFinite()) throw std::invalid_argument("trajectory contains non-finite values");
    }
    if (goal && goal->size() != dim) throw std::invalid_argument("goal dimension does not match dim");
}

Matrix MotionDataset::states(std::size_t i) const {
    const Matrix& pos = trajectories.at(i);
    if (order == 1) return pos;
    Matrix out(pos.rows(), dim);
    out.leftCols(pos.cols()) = pos;
    out.rightCols(pos.cols()) = estimate_derivatives(pos, dt);
    return out;
}

Vector MotionDataset::resolved_goal() const { return goal ? *goal : derive_goal(*this); }

Workspace::Workspace(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size() || lower_.size() == 0)
        throw std::invalid_argument("workspace bounds must be nonempty and of equal size");
    for (Eigen::Index i = 0; i < lower_.size(); ++i) {
        if (!(upper_[i] > lower_[i])) throw std::invalid_argument("workspace upper bound must exceed lower bound");
    }
}

Vector Workspace::normalize(const Vector& x) const {
    return (2.0 * (x - lower_).array() / (upper_ - lower_).array() - 1.0).matrix();
}

Vector Workspace::denormalize(const Vector& z) const {
    return (lower_.array() + (z.array() + 1.0) * 0.5 * (upper_ - lower_).array()).matrix();
}

Matrix Workspace::normalize_rows(const Matrix& x) const {
    Matrix out(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) out.row(r) = normalize(x.row(r).transpose()).transpose();
    return out;
}

Matrix Workspace::denormalize_rows(const Matrix& z) const {
    Matrix out(z.rows(), z.cols());
    for (Eigen::Index r = 0; r < z.rows(); ++r) out.row(r) = denormalize(z.row(r).transpose()).transpose();
    return out;
}

double Workspace::to_normalized_length(double length, int dims) const {
    const int d = (dims <= 0 || dims > dim()) ? dim() : dims;
    return length / half_span().head(d).mean();
}

namespace {

void accumulate_bounds(const MotionDataset& dataset, Vector& lo, Vector& hi) {
    dataset.validate();
    for (std::size_t i = 0; i < dataset.trajectories.size(); ++i) {
        const Matrix s = dataset.states(i);
        const Vector smin = s.colwise().minCoeff().transpose();
        const Vector smax = s.colwise().maxCoeff().transpose();
        if (lo.size() == 0) {
            lo = smin;
            hi = smax;
        } else {
            if (lo.size() != smin.size()) throw std::invalid_argument("datasets do not share a task dimension");
            lo = lo.cwiseMin(smin);
            hi = hi.cwiseMax(smax);
        }
    }
}

Workspace pad_bounds(Vector lo, Vector hi, double padding, std::vector<std::string>* warnings) {
    if (!(padding >= 0.0)) throw std::invalid_argument("padding must be non-negative");
    for (Eigen::Index d = 0; d < lo.size(); ++d) {
        const double range = hi[d] - lo[d];
        if (range <= 0.0) {
            if (warnings) {
                std::ostringstream msg;
                msg << "dimension " << d << " is constant at " << lo[d] << "; expanded by 1.0";
                warnings->push_back(msg.str());
            }
            lo[d] -= 1.0;
            hi[d] += 1.0;
        } else {
            lo[d] -= padding * range;
            hi[d] += padding * range;
        }
    }
    return Workspace(std::move(lo), std::move(hi));
}

}  // namespace

Workspace fit_workspace(const MotionDataset& dataset, double padding, std::vector<std::string>* warnings) {
    Vector lo, hi;
    accumulate_bounds(dataset, lo, hi);
    return pad_bounds(std::move(lo), std::move(hi), padding, warnings);
}

Workspace fit_workspace(const std::vector<MotionDataset>& datasets, double padding,
                        std::vector<std::string>* warnings) {
    if (datasets.empty()) throw std::invalid_argument("no datasets to fit a workspace to");
    Vector lo, hi;
    for (const auto& ds : datasets) accumulate_bounds(ds, lo, hi);
    return pad_bounds(std::move(lo), std::move(hi), padding, warnings);
}

Vector clip_to_workspace(const Vector& z) { return z.cwiseMax(-1.0).cwiseMin(1.0); }

Matrix clip_rows_to_workspace(const Matrix& z) { return z.cwiseMax(-1.0).cwiseMin(1.0); }

Matrix estimate_derivatives(const Matrix& positions, double dt) {
    if (positions.rows() < 2) throw std::invalid_argument("derivative estimation needs at least 2 samples");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    const Eigen::Index t = positions.rows();
    Matrix vel = Matrix::Zero(t, positions.cols());
    vel.topRows(t - 1) = (positions.bottomRows(t - 1) - positions.topRows(t - 1)) / dt;
    return vel;
}

Vector derive_goal(const MotionDataset& dataset) {
    if (dataset.trajectories.empty()) throw std::invalid_argument("cannot derive a goal from an empty dataset");
    const int pd = dataset.position_dim();
    Vector mean = Vector::Zero(pd);
    for (const auto& tr : dataset.trajectories) mean += tr.row(tr.rows() - 1).transpose();
    mean /= static_cast<double>(dataset.trajectories.size());
    if (dataset.order == 1) return mean;
    Vector goal = Vector::Zero(dataset.dim);
    goal.head(pd) = mean;
    return goal;
}

}  // namespace condor
