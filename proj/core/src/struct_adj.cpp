#include "spstgcn/struct_adj.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace spstgcn {

void EdgeDistanceMatrix::validate() const {
    const std::size_t v = d.dim(0);
    if (d.rank() != 2 || d.dim(1) != v) {
        throw ShapeMismatch("EdgeDistanceMatrix must be square, got " + d.shape_string());
    }
    std::vector<char> is_edge(v, 0);
    for (int e : edge_nodes) is_edge[e] = 1;
    for (std::size_t a = 0; a < v; ++a) {
        for (std::size_t b = 0; b < v; ++b) {
            const double val = d.at(a, b);
            if (!std::isfinite(val) || val < 0.0) {
                throw Error("EdgeDistanceMatrix: negative or non-finite entry");
            }
            if (val != d.at(b, a)) throw Error("EdgeDistanceMatrix: not symmetric");
            if (a == b && val != 0.0) throw Error("EdgeDistanceMatrix: nonzero diagonal");
            if ((!is_edge[a] || !is_edge[b]) && val != 0.0) {
                throw Error("EdgeDistanceMatrix: nonzero entry outside edge nodes");
            }
        }
    }
}

Series joint_series(const FeatureTensor& x, int joint, std::size_t body) {
    const std::size_t c_len = x.channels(), t_len = x.frames();
    if (joint < 0 || static_cast<std::size_t>(joint) >= x.joints() || body >= x.bodies()) {
        throw ShapeMismatch("joint_series: joint or body out of range");
    }
    Series s(t_len, c_len);
    for (std::size_t t = 0; t < t_len; ++t) {
        for (std::size_t c = 0; c < c_len; ++c) {
            s.at(t, c) = x.data.at(c, t, static_cast<std::size_t>(joint), body);
        }
    }
    return s;
}

EdgeDistanceMatrix edge_distance_matrix(const FeatureTensor& x, const GraphSpec& g,
                                        const StructAdjConfig& cfg) {
    if (x.joints() != g.joint_count) {
        throw ShapeMismatch("edge_distance_matrix: tensor joints " + std::to_string(x.joints()) +
                            " != graph joints " + std::to_string(g.joint_count));
    }
    const std::size_t v = g.joint_count;
    EdgeDistanceMatrix out;
    out.d = Tensor({v, v});
    out.edge_nodes = g.edge_nodes;

    std::vector<Series> series;
    series.reserve(g.edge_nodes.size());
    for (int node : g.edge_nodes) series.push_back(joint_series(x, node, cfg.body));

    // One FastDTW call per unordered pair; the symmetric entry is assigned,
    // not recomputed (Algorithm 1's D[a][b]==0 memo).
    for (std::size_t i = 0; i < g.edge_nodes.size(); ++i) {
        for (std::size_t j = i + 1; j < g.edge_nodes.size(); ++j) {
            const WarpPath path = fastdtw(series[i], series[j], cfg.radius);
            ++out.dtw_evaluations;
            double cost = path.total_cost;
            if (cfg.normalize_by_path && !path.steps.empty()) {
                cost /= static_cast<double>(path.steps.size());
            }
            const std::size_t a = static_cast<std::size_t>(g.edge_nodes[i]);
            const std::size_t b = static_cast<std::size_t>(g.edge_nodes[j]);
            out.d.at(a, b) = cost;
            out.d.at(b, a) = cost;
        }
    }
    return out;
}

void StructuralAdjacency::validate(const std::vector<int>& edge_nodes) const {
    const std::size_t v = as.dim(0);
    if (as.rank() != 2 || as.dim(1) != v) {
        throw ShapeMismatch("StructuralAdjacency must be square, got " + as.shape_string());
    }
    std::vector<char> is_edge(v, 0);
    for (int e : edge_nodes) is_edge[e] = 1;
    for (std::size_t a = 0; a < v; ++a) {
        for (std::size_t b = 0; b < v; ++b) {
            const double val = as.at(a, b);
            if (!std::isfinite(val)) throw Error("StructuralAdjacency: non-finite entry");
            if (a == b) {
                if (val != 1.0) throw Error("StructuralAdjacency: diagonal must be 1");
            } else if (is_edge[a] && is_edge[b]) {
                if (val > 0.0) throw Error("StructuralAdjacency: positive off-diagonal");
                if (val != as.at(b, a)) throw Error("StructuralAdjacency: not symmetric");
            } else if (val != 0.0) {
                throw Error("StructuralAdjacency: nonzero entry outside edge-node pairs");
            }
        }
    }
}

StructuralAdjacency structural_adjacency(const EdgeDistanceMatrix& d, double epsilon) {
    const std::size_t v = d.d.dim(0);
    StructuralAdjacency out;
    out.as = Tensor::identity(v);
    for (std::size_t i = 0; i < d.edge_nodes.size(); ++i) {
        for (std::size_t j = 0; j < d.edge_nodes.size(); ++j) {
            if (i == j) continue;
            const std::size_t a = static_cast<std::size_t>(d.edge_nodes[i]);
            const std::size_t b = static_cast<std::size_t>(d.edge_nodes[j]);
            out.as.at(a, b) = -1.0 / std::max(d.d.at(a, b), epsilon);
        }
    }
    return out;
}

StructuralAdjacency structural_adjacency_for(const FeatureTensor& x, const GraphSpec& g,
                                             const StructAdjConfig& cfg) {
    return structural_adjacency(edge_distance_matrix(x, g, cfg), cfg.epsilon);
}

std::vector<StructuralAdjacency> precompute_structural(const std::vector<FeatureTensor>& samples,
                                                       const GraphSpec& g,
                                                       const StructAdjConfig& cfg, unsigned jobs) {
    std::vector<StructuralAdjacency> out(samples.size());
    if (jobs <= 1 || samples.size() <= 1) {
        for (std::size_t i = 0; i < samples.size(); ++i) {
            out[i] = structural_adjacency_for(samples[i], g, cfg);
        }
        return out;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= samples.size()) return;
            out[i] = structural_adjacency_for(samples[i], g, cfg);
        }
    };
    std::vector<std::thread> pool;
    const unsigned n = std::min<unsigned>(jobs, static_cast<unsigned>(samples.size()));
    pool.reserve(n);
    for (unsigned w = 0; w < n; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    return out;
}

} // namespace spstgcn
