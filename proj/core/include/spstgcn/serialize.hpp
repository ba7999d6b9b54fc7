#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "spstgcn/nn.hpp"
#include "spstgcn/tensor.hpp"

namespace spstgcn {

// All binary formats are little-endian; 64-bit floats throughout.

// --- feature tensor cache: magic, u32 C/T/V/M header, then data -------------
void save_feature_tensor(const std::filesystem::path& path, const FeatureTensor& t);
FeatureTensor load_feature_tensor(const std::filesystem::path& path);

// --- structural adjacency cache: per-sample V x V blocks keyed by id --------
void save_adjacency_cache(const std::filesystem::path& path,
                          const std::vector<std::pair<std::string, Tensor>>& entries);
std::vector<std::pair<std::string, Tensor>> load_adjacency_cache(
    const std::filesystem::path& path);

// --- checkpoints: versioned named parameter blocks + the model config -------
struct Checkpoint {
    std::string config_text;                            // ModelConfig key-value form
    std::vector<std::pair<std::string, Tensor>> blocks; // (name, tensor)
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

Checkpoint checkpoint_from_model(SpStGcnModel& model);
// Restores parameter values by name; throws on missing or mismatched blocks.
void load_into_model(SpStGcnModel& model, const Checkpoint& ckpt);

} // namespace spstgcn
