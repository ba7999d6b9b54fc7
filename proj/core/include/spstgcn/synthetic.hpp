#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spstgcn/skeleton.hpp"
#include "spstgcn/tensor.hpp"

namespace spstgcn {

// Parameterized edge-node motion programs over the 25-joint NTU skeleton.
// Only the five default edge nodes (head, hand tips, feet) ever move; the
// rest of the body holds a standing pose plus sensor noise, so class pairs
// drawn from the hand programs differ only in edge-node co-movement.
enum class MotionProgram {
    hands_converge,    // hand tips travel toward a meeting point in front of the chest
    hands_independent, // each hand tip oscillates with its own random waveform
    hands_sync,        // both hand tips share one random waveform
    foot_oscillate,    // left foot taps; hands rest
};

std::string to_string(MotionProgram p);
MotionProgram motion_program_from_string(const std::string& name);

struct SyntheticSpec {
    std::vector<MotionProgram> classes = {MotionProgram::hands_converge,
                                          MotionProgram::hands_independent,
                                          MotionProgram::hands_sync};
    std::size_t samples_per_class = 40;
    std::size_t frames = 64;
    std::size_t bodies = 1;
    double noise = 0.004; // std-dev of per-joint jitter, meters
};

struct SyntheticDataset {
    std::vector<FeatureTensor> tensors; // (3, frames, 25, bodies) each
    std::vector<int> labels;            // class indices, class-major order
};

// Deterministic for a fixed seed; each sample draws from its own RNG stream
// so the result is independent of generation order.
SyntheticDataset generate_synthetic_dataset(const SyntheticSpec& spec, std::uint64_t seed);

// Rebuilds a SkeletonSequence (single tracked body per slot) from a raw
// coordinate tensor, for writing NTU-format files.
SkeletonSequence tensor_to_sequence(const FeatureTensor& raw, std::string source_id);

// The standing pose used by the generator, shape (25 x 3), meters.
std::vector<std::array<double, 3>> synthetic_base_pose();

} // namespace spstgcn
