#include "condor/synth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>

namespace condor {

namespace {

constexpr double kPi = std::numbers::pi;

// Curves are parameterized by u in [0, 1] with u = 0 at the goal (origin).
using Curve = std::function<Eigen::Vector2d(double u, double a, double b)>;

Eigen::Vector2d sine(double u, double a, double b) {
    return {-40.0 * u * (1.0 + a), 10.0 * (1.0 + b) * std::sin(3.0 * kPi * u)};
}

Eigen::Vector2d spiral(double u, double a, double b) {
    const double r = 30.0 * (1.0 + a) * u;
    const double theta = 2.5 * kPi * u * (1.0 + 0.3 * b);
    return {r * std::cos(theta + 0.5 * kPi), r * std::sin(theta + 0.5 * kPi)};
}

Eigen::Vector2d scurve(double u, double a, double b) {
    return {15.0 * (1.0 + b) * std::sin(2.0 * kPi * u), 35.0 * (1.0 + a) * u};
}

// Prolate cycloid over one period: a single self-intersection.
Eigen::Vector2d loop(double u, double a, double b) {
    const double t = 2.0 * kPi * u;
    return {5.0 * (1.0 + a) * t - 12.0 * std::sin(t), 12.0 * (1.0 + b) * (1.0 - std::cos(t))};
}

Eigen::Vector2d line(double u, double a, double b) { return {-30.0 * u * (1.0 + a), -20.0 * u * (1.0 + b)}; }

Curve curve_for(const std::string& family) {
    if (family == "sine") return sine;
    if (family == "spiral") return spiral;
    if (family == "scurve") return scurve;
    if (family == "loop") return loop;
    if (family == "line") return line;
    throw std::invalid_argument("unknown synthetic family '" + family + "'");
}

// Exponential approach to u = 0, corrected so the velocity also vanishes at the end.
double exponential_timing(double tau) {
    constexpr double k = 5.0;
    const double tail = std::exp(-k);
    return (std::exp(-k * tau) - tail * (1.0 + k * (1.0 - tau))) / (1.0 - tail * (1.0 + k));
}

// u falls from 1 to 0 along 10s³ − 15s⁴ + 6s⁵.
double minimum_jerk_timing(double tau) {
    return 1.0 - tau * tau * tau * (10.0 - 15.0 * tau + 6.0 * tau * tau);
}

}  // namespace

std::vector<std::string> synth_families() { return {"sine", "spiral", "scurve", "loop", "line"}; }

MotionDataset synthesize(const std::string& family, const SynthOptions& options) {
    const Curve curve = curve_for(family);
    if (options.demos < 1 || options.samples < 2 || !(options.dt > 0.0))
        throw std::invalid_argument("synthetic dataset needs demos >= 1, samples >= 2 and dt > 0");
    if (options.order != 1 && options.order != 2) throw std::invalid_argument("order must be 1 or 2");
    if (options.rest < 0.0 || options.rest >= 1.0) throw std::invalid_argument("rest fraction must be in [0, 1)");
    const int moving = std::max(2, static_cast<int>(std::lround(options.samples * (1.0 - options.rest))));
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    MotionDataset ds;
    ds.name = family;
    ds.dt = options.dt;
    ds.order = options.order;
    ds.dim = 2 * options.order;
    for (int d = 0; d < options.demos; ++d) {
        const double a = options.jitter * unit(rng);
        const double b = options.jitter * unit(rng);
        Matrix tr(options.samples, 2);
        for (int i = 0; i < options.samples; ++i) {
            const double tau = std::min(1.0, static_cast<double>(i) / (moving - 1));
            const double u = options.profile == TimingProfile::minimum_jerk ? minimum_jerk_timing(tau)
                                                                             : exponential_timing(tau);
            tr.row(i) = curve(u, a, b).transpose();
        }
        ds.trajectories.push_back(std::move(tr));
    }
    ds.validate();
    return ds;
}

}  // namespace condor
