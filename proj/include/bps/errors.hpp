#pragma once

#include <stdexcept>

namespace bps {

// A bounce was requested at a point with zero gradient.
struct DegenerateBounceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A thinning envelope failed to dominate the intensity it claims to bound.
struct EnvelopeViolationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A factor bound was exceeded by the exact local intensity (acceptance ratio > 1).
struct BoundViolationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A convex line search failed to bracket within its iteration cap, which
// signals a mis-specified (non-convex) energy.
struct NonConvexEnergyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace bps
