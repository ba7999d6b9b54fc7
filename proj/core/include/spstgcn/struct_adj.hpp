#pragma once

#include <cstddef>
#include <vector>

#include "spstgcn/dtw.hpp"
#include "spstgcn/graph.hpp"
#include "spstgcn/tensor.hpp"

namespace spstgcn {

struct StructAdjConfig {
    int radius = 1;                   // FastDTW refinement radius
    bool normalize_by_path = true;    // divide DTW cost by warp-path length
    double epsilon = 1e-6;            // floor on distances before inversion
    std::size_t body = 0;             // body slot fed to DTW
};

// Pairwise FastDTW costs between edge-node trajectories; zero on the
// diagonal and outside edge-node rows/columns.
struct EdgeDistanceMatrix {
    Tensor d; // V x V, symmetric, nonnegative
    std::vector<int> edge_nodes;
    std::size_t dtw_evaluations = 0; // one per unordered pair (memoized)

    void validate() const;
};

// Runs FastDTW once per unordered edge-node pair over x[:, :, node, body].
EdgeDistanceMatrix edge_distance_matrix(const FeatureTensor& x, const GraphSpec& g,
                                        const StructAdjConfig& cfg = {});

// Per-sample structural matrix As = I - D^{-1}, where D^{-1} is the
// element-wise reciprocal of the off-diagonal edge-node entries (floored at
// epsilon). Unit diagonal, non-positive off-diagonals.
struct StructuralAdjacency {
    Tensor as; // V x V

    void validate(const std::vector<int>& edge_nodes) const;
};

StructuralAdjacency structural_adjacency(const EdgeDistanceMatrix& d, double epsilon = 1e-6);

// Convenience: distance matrix + inversion in one call.
StructuralAdjacency structural_adjacency_for(const FeatureTensor& x, const GraphSpec& g,
                                             const StructAdjConfig& cfg = {});

// Extracts one joint's trajectory as a DTW series (T points of C dims).
Series joint_series(const FeatureTensor& x, int joint, std::size_t body);

// Precomputes As for many samples with `jobs` worker threads; output order
// matches input order regardless of the worker count.
std::vector<StructuralAdjacency> precompute_structural(const std::vector<FeatureTensor>& samples,
                                                       const GraphSpec& g,
                                                       const StructAdjConfig& cfg = {},
                                                       unsigned jobs = 1);

} // namespace spstgcn
