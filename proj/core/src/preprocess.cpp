#include "spstgcn/preprocess.hpp"

#include <algorithm>
#include <cmath>

namespace spstgcn {

namespace {

void require_raw3d(const FeatureTensor& x, const char* op) {
    if (x.semantics != ChannelSemantics::raw3d || x.channels() != 3) {
        throw ShapeMismatch(std::string(op) + ": expects a raw3d (3,T,V,M) tensor, got " +
                            x.data.shape_string());
    }
}

} // namespace

FeatureTensor joint_branch(const FeatureTensor& x, int center_joint) {
    require_raw3d(x, "joint_branch");
    const std::size_t t_len = x.frames(), v = x.joints(), m_len = x.bodies();
    if (center_joint < 0 || static_cast<std::size_t>(center_joint) >= v) {
        throw ShapeMismatch("joint_branch: center joint out of range");
    }
    Tensor out({6, t_len, v, m_len});
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t t = 0; t < t_len; ++t) {
            for (std::size_t j = 0; j < v; ++j) {
                for (std::size_t m = 0; m < m_len; ++m) {
                    const double xv = x.data.at(c, t, j, m);
                    out.at(c, t, j, m) = xv;
                    out.at(c + 3, t, j, m) = xv - x.data.at(c, t, center_joint, m);
                }
            }
        }
    }
    return FeatureTensor(std::move(out), ChannelSemantics::joint6);
}

FeatureTensor velocity_branch(const FeatureTensor& x) {
    require_raw3d(x, "velocity_branch");
    const std::size_t t_len = x.frames(), v = x.joints(), m_len = x.bodies();
    if (t_len < 3) {
        throw SequenceTooShort("velocity_branch: needs T >= 3, got " + std::to_string(t_len));
    }
    Tensor out({6, t_len, v, m_len});
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t t = 0; t < t_len; ++t) {
            for (std::size_t j = 0; j < v; ++j) {
                for (std::size_t m = 0; m < m_len; ++m) {
                    if (t + 1 < t_len) {
                        out.at(c, t, j, m) = x.data.at(c, t + 1, j, m) - x.data.at(c, t, j, m);
                    }
                    if (t + 2 < t_len) {
                        out.at(c + 3, t, j, m) = x.data.at(c, t + 2, j, m) - x.data.at(c, t, j, m);
                    }
                }
            }
        }
    }
    return FeatureTensor(std::move(out), ChannelSemantics::velocity6);
}

FeatureTensor bone_branch(const FeatureTensor& x, const GraphSpec& graph) {
    require_raw3d(x, "bone_branch");
    const std::size_t t_len = x.frames(), v = x.joints(), m_len = x.bodies();
    if (graph.joint_count != v) {
        throw ShapeMismatch("bone_branch: graph has " + std::to_string(graph.joint_count) +
                            " joints, tensor has " + std::to_string(v));
    }
    const std::vector<int>& parent =
        graph.parent_map.empty() ? derive_parent_map(graph) : graph.parent_map;

    Tensor out({6, t_len, v, m_len});
    for (std::size_t t = 0; t < t_len; ++t) {
        for (std::size_t j = 0; j < v; ++j) {
            const std::size_t pj = static_cast<std::size_t>(parent[j]);
            for (std::size_t m = 0; m < m_len; ++m) {
                double bone[3];
                for (std::size_t c = 0; c < 3; ++c) {
                    bone[c] = x.data.at(c, t, j, m) - x.data.at(c, t, pj, m);
                    out.at(c, t, j, m) = bone[c];
                }
                const double norm =
                    std::sqrt(bone[0] * bone[0] + bone[1] * bone[1] + bone[2] * bone[2]);
                const double denom = std::max(norm, kBoneNormFloor);
                for (std::size_t c = 0; c < 3; ++c) {
                    const double arg = std::clamp(bone[c] / denom, -1.0, 1.0);
                    out.at(c + 3, t, j, m) = std::acos(arg);
                }
            }
        }
    }
    return FeatureTensor(std::move(out), ChannelSemantics::bone6);
}

BranchSet preprocess_all(const FeatureTensor& x, const GraphSpec& graph) {
    BranchSet set;
    set.joint = joint_branch(x, graph.center_joint);
    set.velocity = velocity_branch(x);
    set.bone = bone_branch(x, graph);
    return set;
}

} // namespace spstgcn
