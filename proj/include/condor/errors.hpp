#pragma once

#include <stdexcept>
#include <string>

namespace condor {

/// A loss, gradient or rolled-out state stopped being finite.
class NumericDivergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace condor
