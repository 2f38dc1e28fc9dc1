#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "condor/evaluation.hpp"

namespace condor {

namespace {

void require_points(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() == 0 || b.rows() == 0) throw std::invalid_argument(std::string(what) + ": empty trajectory");
    if (a.cols() != b.cols()) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

double dist(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) { return (a.row(i) - b.row(j)).norm(); }

}  // namespace

double trajectory_rmse(const Matrix& a, const Matrix& b) {
    require_points(a, b, "rmse");
    if (a.rows() != b.rows()) throw std::invalid_argument("rmse: trajectories differ in length");
    return std::sqrt((a - b).rowwise().squaredNorm().mean());
}

double dtwd(const Matrix& a, const Matrix& b) {
    require_points(a, b, "dtwd");
    const Eigen::Index n = a.rows(), m = b.rows();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> prev(static_cast<std::size_t>(m + 1), inf), cur(static_cast<std::size_t>(m + 1), inf);
    prev[0] = 0.0;
    for (Eigen::Index i = 1; i <= n; ++i) {
        cur[0] = inf;
        for (Eigen::Index j = 1; j <= m; ++j) {
            const auto uj = static_cast<std::size_t>(j);
            const double best = std::min({prev[uj - 1], prev[uj], cur[uj - 1]});
            cur[uj] = dist(a, i - 1, b, j - 1) + best;
        }
        std::swap(prev, cur);
    }
    return prev[static_cast<std::size_t>(m)];
}

double frechet(const Matrix& a, const Matrix& b) {
    require_points(a, b, "frechet");
    const Eigen::Index n = a.rows(), m = b.rows();
    Matrix ca(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            const double d = dist(a, i, b, j);
            if (i == 0 && j == 0) {
                ca(i, j) = d;
            } else if (i == 0) {
                ca(i, j) = std::max(ca(i, j - 1), d);
            } else if (j == 0) {
                ca(i, j) = std::max(ca(i - 1, j), d);
            } else {
                ca(i, j) = std::max(std::min({ca(i - 1, j), ca(i - 1, j - 1), ca(i, j - 1)}), d);
            }
        }
    }
    return ca(n - 1, m - 1);
}

double goal_precision(const std::vector<Matrix>& rollouts, const Vector& goal) {
    if (rollouts.empty()) throw std::invalid_argument("goal precision needs at least one rollout");
    double total = 0.0;
    for (const auto& r : rollouts) {
        if (r.rows() == 0 || r.cols() != goal.size()) throw std::invalid_argument("rollout shape does not match goal");
        total += (r.row(r.rows() - 1).transpose() - goal).norm();
    }
    return total / static_cast<double>(rollouts.size());
}

double hyper_objective(double accuracy, double stable, double goal, double gamma_stable, double gamma_goal) {
    return accuracy + gamma_stable * stable + gamma_goal * goal;
}

}  // namespace condor
