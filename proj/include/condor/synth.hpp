#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "condor/geometry.hpp"

namespace condor {

/// Progress along the curve over time. `exponential` starts at full speed and
/// approaches the goal exponentially; `minimum_jerk` starts and ends at rest.
enum class TimingProfile { exponential, minimum_jerk };

/// Parameters of a synthetic demonstration family. Every demonstration ends at
/// rest at the origin; start points and shapes are perturbed per demonstration.
struct SynthOptions {
    int demos = 7;
    int samples = 150;
    double dt = 0.01;
    double jitter = 0.06;  ///< relative shape perturbation
    double rest = 0.5;     ///< fraction of samples spent at rest on the goal
    int order = 1;
    TimingProfile profile = TimingProfile::exponential;
    std::uint64_t seed = 7;
};

/// Known families: "sine", "spiral", "scurve", "loop" (crosses itself once), "line".
std::vector<std::string> synth_families();

/// Throws std::invalid_argument for an unknown family.
MotionDataset synthesize(const std::string& family, const SynthOptions& options = {});

}  // namespace condor
