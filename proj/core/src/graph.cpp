#include "spstgcn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>

namespace spstgcn {

std::vector<int> GraphSpec::degrees() const {
    std::vector<int> deg(joint_count, 0);
    for (const auto& [u, v] : edges) {
        ++deg[u];
        ++deg[v];
    }
    return deg;
}

void GraphSpec::validate() const {
    const int v = static_cast<int>(joint_count);
    if (v <= 0) throw Error("GraphSpec: joint_count must be positive");
    if (edges.size() + 1 != joint_count) {
        throw Error("GraphSpec: a tree over " + std::to_string(v) + " joints needs " +
                    std::to_string(v - 1) + " edges, got " + std::to_string(edges.size()));
    }
    for (const auto& [a, b] : edges) {
        if (a < 0 || b < 0 || a >= v || b >= v || a == b) {
            throw Error("GraphSpec: bad edge (" + std::to_string(a) + "," + std::to_string(b) + ")");
        }
    }
    if (center_joint < 0 || center_joint >= v) {
        throw Error("GraphSpec: center joint out of range");
    }
    // connectivity (edge count already matches a tree, so connected <=> acyclic)
    std::vector<std::vector<int>> adj(joint_count);
    for (const auto& [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<char> seen(joint_count, 0);
    std::deque<int> q{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        for (int w : adj[u]) {
            if (!seen[w]) {
                seen[w] = 1;
                ++reached;
                q.push_back(w);
            }
        }
    }
    if (reached != joint_count) throw Error("GraphSpec: edges do not form a connected tree");
    const auto deg = degrees();
    for (int e : edge_nodes) {
        if (e < 0 || e >= v) throw Error("GraphSpec: edge node out of range");
        if (deg[e] != 1) {
            throw Error("GraphSpec: edge node " + std::to_string(e) + " has degree " +
                        std::to_string(deg[e]) + ", expected 1");
        }
    }
}

GraphSpec ntu_graph() {
    // NTU RGB+D 25-joint tree. Indices are 0-based; the dataset's 1-based
    // labels are these plus one (label 2 "middle of the spine" = index 1).
    GraphSpec g;
    g.joint_count = 25;
    g.edges = {
        {0, 1},   // base of spine - middle of spine
        {1, 20},  // middle of spine - spine
        {2, 20},  // neck - spine
        {3, 2},   // head - neck
        {4, 20},  // left shoulder - spine
        {5, 4},   // left elbow - left shoulder
        {6, 5},   // left wrist - left elbow
        {7, 6},   // left hand - left wrist
        {8, 20},  // right shoulder - spine
        {9, 8},   // right elbow - right shoulder
        {10, 9},  // right wrist - right elbow
        {11, 10}, // right hand - right wrist
        {12, 0},  // left hip - base of spine
        {13, 12}, // left knee - left hip
        {14, 13}, // left ankle - left knee
        {15, 14}, // left foot - left ankle
        {16, 0},  // right hip - base of spine
        {17, 16}, // right knee - right hip
        {18, 17}, // right ankle - right knee
        {19, 18}, // right foot - right ankle
        {21, 7},  // left hand tip - left hand
        {22, 7},  // left thumb - left hand
        {23, 11}, // right hand tip - right hand
        {24, 11}, // right thumb - right hand
    };
    g.center_joint = 1;
    g.edge_nodes = {3, 21, 23, 15, 19}; // head, hand tips, feet
    g.parent_map = derive_parent_map(g);
    return g;
}

std::vector<int> derive_parent_map(const GraphSpec& g) {
    std::vector<std::vector<int>> adj(g.joint_count);
    for (const auto& [a, b] : g.edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<int> parent(g.joint_count, -1);
    parent[g.center_joint] = g.center_joint;
    std::deque<int> q{g.center_joint};
    while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        for (int w : adj[u]) {
            if (parent[w] < 0) {
                parent[w] = u;
                q.push_back(w);
            }
        }
    }
    return parent;
}

std::vector<std::vector<int>> hop_distances(const GraphSpec& g) {
    const int v = static_cast<int>(g.joint_count);
    std::vector<std::vector<int>> adj(v);
    for (const auto& [a, b] : g.edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<std::vector<int>> dist(v, std::vector<int>(v, -1));
    for (int s = 0; s < v; ++s) {
        dist[s][s] = 0;
        std::deque<int> q{s};
        while (!q.empty()) {
            int u = q.front();
            q.pop_front();
            for (int w : adj[u]) {
                if (dist[s][w] < 0) {
                    dist[s][w] = dist[s][u] + 1;
                    q.push_back(w);
                }
            }
        }
    }
    return dist;
}

std::vector<Tensor> hop_partition(const GraphSpec& g, int max_hop) {
    if (max_hop < 0) throw Error("hop_partition: max_hop must be nonnegative");
    const std::size_t v = g.joint_count;
    const auto dist = hop_distances(g);
    std::vector<Tensor> parts;
    parts.reserve(max_hop + 1);
    for (int j = 0; j <= max_hop; ++j) {
        Tensor a({v, v});
        for (std::size_t r = 0; r < v; ++r) {
            for (std::size_t c = 0; c < v; ++c) {
                if (dist[r][c] == j) a.at(r, c) = 1.0;
            }
        }
        parts.push_back(std::move(a));
    }
    return parts;
}

Tensor normalize_adjacency(const Tensor& a, double alpha) {
    if (a.rank() != 2 || a.dim(0) != a.dim(1)) {
        throw ShapeMismatch("normalize_adjacency: expected square matrix, got " + a.shape_string());
    }
    const std::size_t v = a.dim(0);
    std::vector<double> inv_sqrt(v);
    for (std::size_t i = 0; i < v; ++i) {
        double row = alpha;
        for (std::size_t k = 0; k < v; ++k) row += a.at(i, k);
        inv_sqrt[i] = 1.0 / std::sqrt(row);
    }
    Tensor out({v, v});
    for (std::size_t i = 0; i < v; ++i) {
        for (std::size_t k = 0; k < v; ++k) {
            out.at(i, k) = inv_sqrt[i] * a.at(i, k) * inv_sqrt[k];
        }
    }
    return out;
}

SpatialAdjacency build_spatial_adjacency(const GraphSpec& g, int max_hop, double alpha) {
    SpatialAdjacency adj;
    adj.max_hop = max_hop;
    adj.alpha = alpha;
    adj.raw = hop_partition(g, max_hop);
    for (const Tensor& a : adj.raw) {
        const std::size_t v = a.dim(0);
        std::vector<double> lambda(v);
        for (std::size_t i = 0; i < v; ++i) {
            double row = alpha;
            for (std::size_t k = 0; k < v; ++k) row += a.at(i, k);
            lambda[i] = row;
        }
        adj.degree.push_back(std::move(lambda));
        adj.normalized.push_back(normalize_adjacency(a, alpha));
    }
    return adj;
}

void write_graph(std::ostream& os, const GraphSpec& g) {
    os << "joints = " << g.joint_count << "\n";
    os << "center = " << g.center_joint << "\n";
    os << "edge_nodes =";
    for (int e : g.edge_nodes) os << " " << e;
    os << "\n";
    for (const auto& [a, b] : g.edges) os << a << " " << b << "\n";
}

GraphSpec read_graph(std::istream& is) {
    GraphSpec g;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        if (line.find('=') != std::string::npos) {
            std::string key, eq;
            ls >> key >> eq;
            if (key == "joints") {
                ls >> g.joint_count;
            } else if (key == "center") {
                ls >> g.center_joint;
            } else if (key == "edge_nodes") {
                int e;
                while (ls >> e) g.edge_nodes.push_back(e);
            } else {
                throw MalformedFile("graph: unknown header key '" + key + "'");
            }
        } else {
            int a, b;
            if (!(ls >> a >> b)) throw MalformedFile("graph: bad edge line '" + line + "'");
            g.edges.emplace_back(a, b);
        }
    }
    g.validate();
    g.parent_map = derive_parent_map(g);
    return g;
}

void save_graph(const std::filesystem::path& path, const GraphSpec& g) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    write_graph(os, g);
}

GraphSpec load_graph(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    return read_graph(is);
}

} // namespace spstgcn
