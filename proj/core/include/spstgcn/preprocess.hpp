#pragma once

#include "spstgcn/graph.hpp"
#include "spstgcn/tensor.hpp"

namespace spstgcn {

// The three 6-channel input branches computed from raw coordinates.
struct BranchSet {
    FeatureTensor joint;
    FeatureTensor velocity;
    FeatureTensor bone;
};

// Channels 0-2: original positions; channels 3-5: positions relative to the
// center joint (exactly zero at the center joint itself).
FeatureTensor joint_branch(const FeatureTensor& x, int center_joint);

// Channels 0-2: one-frame displacement (last frame zero-padded); channels
// 3-5: two-frame displacement (last two frames zero-padded). Requires T >= 3.
FeatureTensor velocity_branch(const FeatureTensor& x);

// Channels 0-2: bone vector toward the parent joint; channels 3-5: the three
// direction-cosine angles in radians, each in [0, pi]. Zero-length bones fall
// back to arccos(0) = pi/2 through the epsilon guard on the norm.
FeatureTensor bone_branch(const FeatureTensor& x, const GraphSpec& graph);

// All three branches over a shared (T, V, M).
BranchSet preprocess_all(const FeatureTensor& x, const GraphSpec& graph);

// Guard applied to the bone-norm denominator.
inline constexpr double kBoneNormFloor = 1e-8;

} // namespace spstgcn
