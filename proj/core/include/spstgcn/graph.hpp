#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "spstgcn/tensor.hpp"

namespace spstgcn {

// Skeleton topology: an undirected tree over V joints plus the designated
// center joint and the ordered edge-node set (degree-1 joints that receive
// structural connections).
struct GraphSpec {
    std::size_t joint_count = 0;
    std::vector<std::pair<int, int>> edges; // undirected pairs, 0-based
    int center_joint = 0;
    std::vector<int> edge_nodes;
    std::vector<int> parent_map; // joint -> parent, rooted at center (center maps to itself)

    std::vector<int> degrees() const;
    // Tree connectivity, degree-1 edge nodes, center in range.
    void validate() const;
};

// The 25-joint NTU skeleton: 24 edges, center = middle of the spine,
// edge nodes = head, hand tips, feet (thumbs excluded; they are also
// degree-1 but the structural branch uses exactly five nodes).
GraphSpec ntu_graph();

// Derives parent_map by rooting the tree at g.center_joint.
std::vector<int> derive_parent_map(const GraphSpec& g);

// All-pairs shortest-path distances by BFS; V x V matrix of int.
std::vector<std::vector<int>> hop_distances(const GraphSpec& g);

// Partition j has entry (u,v)=1 iff the shortest-path distance is exactly j.
// Partition 0 is the identity.
std::vector<Tensor> hop_partition(const GraphSpec& g, int max_hop);

// Symmetric degree normalization: Lambda^{-1/2} A Lambda^{-1/2} with
// Lambda[i][i] = sum_k A[i][k] + alpha.
Tensor normalize_adjacency(const Tensor& a, double alpha);

// Normalized hop-partitioned adjacency stack used by the spatial branch.
struct SpatialAdjacency {
    std::vector<Tensor> raw;                 // A_j, 0/1
    std::vector<Tensor> normalized;          // Lambda_j^{-1/2} A_j Lambda_j^{-1/2}
    std::vector<std::vector<double>> degree; // diagonal of Lambda_j
    int max_hop = 0;
    double alpha = 0.0;

    std::size_t partitions() const { return normalized.size(); }
    std::size_t joints() const { return normalized.empty() ? 0 : normalized[0].dim(0); }
};

SpatialAdjacency build_spatial_adjacency(const GraphSpec& g, int max_hop = 2, double alpha = 1e-3);

// Plain-text form: key-value header (joints, center, edge_nodes) + edge list.
void write_graph(std::ostream& os, const GraphSpec& g);
GraphSpec read_graph(std::istream& is);
void save_graph(const std::filesystem::path& path, const GraphSpec& g);
GraphSpec load_graph(const std::filesystem::path& path);

} // namespace spstgcn
