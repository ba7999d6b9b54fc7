#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spstgcn/tensor.hpp"

namespace spstgcn {

struct BodyRecord {
    std::int64_t body_id = 0;
    std::vector<std::array<double, 3>> joints; // exactly joint_count entries, meters
};

struct FrameRecord {
    std::vector<BodyRecord> bodies;
};

struct SkeletonSequence {
    std::vector<FrameRecord> frames;
    std::size_t joint_count = 25;
    std::size_t body_capacity = 2;
    std::optional<int> label;
    std::string source_id;

    std::size_t frame_count() const { return frames.size(); }
    void validate() const;
};

// Parses the NTU `.skeleton` text layout:
//   frame count
//   per frame: body count; per body: header line (body id first, rest
//   ignored), joint count, then one line per joint whose first three fields
//   are x y z in meters.
// Throws MalformedFile when declared counts disagree with the content and
// NonFiniteCoordinate on NaN/Inf coordinates.
SkeletonSequence parse_ntu_skeleton(std::istream& input, std::string source_id = {},
                                    std::size_t joint_count = 25);
SkeletonSequence parse_ntu_skeleton_file(const std::filesystem::path& path,
                                         std::size_t joint_count = 25);

// Emits a sequence back in the same text layout (used by the synthetic
// dataset writer; ignored fields are written as zeros).
void write_ntu_skeleton(std::ostream& os, const SkeletonSequence& seq);

// Normalizes a sequence to a (3, target_frames, V, M) raw-coordinate tensor.
// Longer sequences are uniformly subsampled, shorter ones zero-padded at the
// tail. Body slots are filled in order of descending motion energy; absent
// bodies are all-zero slices.
FeatureTensor to_tensor(const SkeletonSequence& seq, std::size_t target_frames,
                        std::size_t body_slots = 2);

// Sum of squared frame-to-frame displacements for one tracked body id.
double motion_energy(const SkeletonSequence& seq, std::int64_t body_id);

enum class SplitRule { by_subject, by_camera, explicit_list };

struct ManifestEntry {
    std::string path;
    int label = 0;
    int subject_id = 0;
    int camera_id = 0;
};

// One record per line: path<TAB>label<TAB>subject_id<TAB>camera_id.
struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    SplitRule split_rule = SplitRule::explicit_list;

    void validate(int num_classes = -1) const; // labels in range, no duplicate paths
};

DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

// Splits entries by the rule: ids listed in `train_ids` go to train, the rest
// to eval. For explicit_list everything lands in train (callers pass two
// manifests instead).
std::pair<std::vector<ManifestEntry>, std::vector<ManifestEntry>>
split_manifest(const DatasetManifest& manifest, const std::vector<int>& train_ids);

} // namespace spstgcn
