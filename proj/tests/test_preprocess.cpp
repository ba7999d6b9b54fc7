#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "spstgcn/preprocess.hpp"
#include "spstgcn/synthetic.hpp"

using namespace spstgcn;

namespace {

FeatureTensor random_raw(std::size_t t, std::size_t v, std::size_t m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Tensor data = oracle::random_tensor({3, t, v, m}, rng);
    return FeatureTensor(std::move(data), ChannelSemantics::raw3d);
}

} // namespace

TEST_CASE("joint branch: relative position at the center joint is exactly zero") {
    const FeatureTensor x = random_raw(6, 25, 2, 1);
    const int center = 1;
    const FeatureTensor j = joint_branch(x, center);
    CHECK(j.data.shape() == std::vector<std::size_t>{6, 6, 25, 2});
    for (std::size_t t = 0; t < 6; ++t) {
        for (std::size_t m = 0; m < 2; ++m) {
            for (std::size_t c = 3; c < 6; ++c) CHECK(j.data.at(c, t, center, m) == 0.0);
        }
    }
    // channels 0-2 are the original coordinates
    for (std::size_t i = 0; i < 50; ++i) {
        CHECK(j.data.at(0, 2, i % 25, 0) == x.data.at(0, 2, i % 25, 0));
    }
}

TEST_CASE("joint branch: all joints at one point zeroes the relative channels") {
    Tensor data({3, 4, 25, 1});
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t t = 0; t < 4; ++t) {
            for (std::size_t j = 0; j < 25; ++j) data.at(c, t, j, 0) = 1.5;
        }
    }
    const FeatureTensor j = joint_branch(FeatureTensor(std::move(data), ChannelSemantics::raw3d), 1);
    for (std::size_t c = 3; c < 6; ++c) {
        for (std::size_t t = 0; t < 4; ++t) {
            for (std::size_t v = 0; v < 25; ++v) CHECK(j.data.at(c, t, v, 0) == 0.0);
        }
    }
}

TEST_CASE("joint branch: constant offset joint shows up in relative channels") {
    Tensor data({3, 3, 25, 1});
    for (std::size_t t = 0; t < 3; ++t) {
        data.at(0, t, 5, 0) = 1.0;
        data.at(1, t, 5, 0) = 2.0;
        data.at(2, t, 5, 0) = 3.0;
    }
    const FeatureTensor j = joint_branch(FeatureTensor(std::move(data), ChannelSemantics::raw3d), 1);
    for (std::size_t t = 0; t < 3; ++t) {
        CHECK(j.data.at(3, t, 5, 0) == 1.0);
        CHECK(j.data.at(4, t, 5, 0) == 2.0);
        CHECK(j.data.at(5, t, 5, 0) == 3.0);
    }
}

TEST_CASE("velocity branch: static pose gives all-zero output") {
    Tensor data({3, 5, 25, 1});
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t t = 0; t < 5; ++t) {
            for (std::size_t j = 0; j < 25; ++j) data.at(c, t, j, 0) = 0.7 * (c + 1);
        }
    }
    const FeatureTensor v = velocity_branch(FeatureTensor(std::move(data), ChannelSemantics::raw3d));
    for (std::size_t i = 0; i < v.data.size(); ++i) CHECK(v.data[i] == 0.0);
}

TEST_CASE("velocity branch: linear motion gives constant v_s and v_f") {
    Tensor data({3, 6, 4, 1});
    for (std::size_t t = 0; t < 6; ++t) {
        for (std::size_t j = 0; j < 4; ++j) data.at(0, t, j, 0) = static_cast<double>(t);
    }
    const FeatureTensor v = velocity_branch(FeatureTensor(std::move(data), ChannelSemantics::raw3d));
    for (std::size_t t = 0; t + 1 < 6; ++t) CHECK(v.data.at(0, t, 2, 0) == 1.0);
    CHECK(v.data.at(0, 5, 2, 0) == 0.0); // padded tail
    for (std::size_t t = 0; t + 2 < 6; ++t) CHECK(v.data.at(3, t, 2, 0) == 2.0);
    CHECK(v.data.at(3, 4, 2, 0) == 0.0);
    CHECK(v.data.at(3, 5, 2, 0) == 0.0);
}

TEST_CASE("velocity branch: telescoping identity v_f[t] = v_s[t] + v_s[t+1]") {
    const FeatureTensor x = random_raw(9, 7, 2, 33);
    const FeatureTensor v = velocity_branch(x);
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t t = 0; t + 2 < 9; ++t) {
            for (std::size_t j = 0; j < 7; ++j) {
                for (std::size_t m = 0; m < 2; ++m) {
                    // direct recomputation from raw input
                    const double vs_t = x.data.at(c, t + 1, j, m) - x.data.at(c, t, j, m);
                    const double vs_t1 = x.data.at(c, t + 2, j, m) - x.data.at(c, t + 1, j, m);
                    CHECK(v.data.at(c + 3, t, j, m) ==
                          doctest::Approx(vs_t + vs_t1).epsilon(1e-12));
                }
            }
        }
    }
}

TEST_CASE("velocity branch: too short sequence raises") {
    const FeatureTensor x = random_raw(2, 4, 1, 5);
    CHECK_THROWS_AS(velocity_branch(x), SequenceTooShort);
}

TEST_CASE("bone branch: axis-aligned bone angles") {
    const GraphSpec g = ntu_graph();
    Tensor data({3, 3, 25, 1});
    // joint 0's parent is 1; give the bone vector (1,0,0)
    for (std::size_t t = 0; t < 3; ++t) data.at(0, t, 0, 0) = 1.0;
    const FeatureTensor b = bone_branch(FeatureTensor(std::move(data), ChannelSemantics::raw3d), g);
    for (std::size_t t = 0; t < 3; ++t) {
        CHECK(b.data.at(0, t, 0, 0) == 1.0);
        CHECK(b.data.at(3, t, 0, 0) == doctest::Approx(0.0));
        CHECK(b.data.at(4, t, 0, 0) == doctest::Approx(std::numbers::pi / 2));
        CHECK(b.data.at(5, t, 0, 0) == doctest::Approx(std::numbers::pi / 2));
    }
}

TEST_CASE("bone branch: center joint is its own parent, guard gives pi/2") {
    const GraphSpec g = ntu_graph();
    const FeatureTensor x = random_raw(4, 25, 2, 9);
    const FeatureTensor b = bone_branch(x, g);
    const std::size_t c = static_cast<std::size_t>(g.center_joint);
    for (std::size_t t = 0; t < 4; ++t) {
        for (std::size_t m = 0; m < 2; ++m) {
            for (std::size_t ch = 0; ch < 3; ++ch) CHECK(b.data.at(ch, t, c, m) == 0.0);
            for (std::size_t ch = 3; ch < 6; ++ch) {
                CHECK(b.data.at(ch, t, c, m) == doctest::Approx(std::numbers::pi / 2));
            }
        }
    }
}

TEST_CASE("bone branch: direction-cosine identity on random nonzero bones") {
    const GraphSpec g = ntu_graph();
    const FeatureTensor x = random_raw(5, 25, 1, 77);
    const FeatureTensor b = bone_branch(x, g);
    for (std::size_t t = 0; t < 5; ++t) {
        for (std::size_t j = 0; j < 25; ++j) {
            double norm = 0.0;
            for (std::size_t c = 0; c < 3; ++c) norm += b.data.at(c, t, j, 0) * b.data.at(c, t, j, 0);
            if (std::sqrt(norm) <= 1e-6) continue;
            double identity = 0.0;
            for (std::size_t c = 3; c < 6; ++c) {
                const double cosang = std::cos(b.data.at(c, t, j, 0));
                identity += cosang * cosang;
            }
            CHECK(identity == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("all angle channels lie in [0, pi]") {
    const GraphSpec g = ntu_graph();
    const FeatureTensor x = random_raw(6, 25, 2, 123);
    const FeatureTensor b = bone_branch(x, g);
    for (std::size_t t = 0; t < 6; ++t) {
        for (std::size_t j = 0; j < 25; ++j) {
            for (std::size_t m = 0; m < 2; ++m) {
                for (std::size_t c = 3; c < 6; ++c) {
                    CHECK(b.data.at(c, t, j, m) >= 0.0);
                    CHECK(b.data.at(c, t, j, m) <= std::numbers::pi);
                }
            }
        }
    }
}

TEST_CASE("translation leaves relative features unchanged, shifts joint channels 0-2") {
    const GraphSpec g = ntu_graph();
    const FeatureTensor x = random_raw(6, 25, 2, 55);
    FeatureTensor shifted = x;
    const double offset[3] = {0.3, -1.2, 2.5};
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t t = 0; t < 6; ++t) {
            for (std::size_t j = 0; j < 25; ++j) {
                for (std::size_t m = 0; m < 2; ++m) shifted.data.at(c, t, j, m) += offset[c];
            }
        }
    }
    const BranchSet a = preprocess_all(x, g);
    const BranchSet b = preprocess_all(shifted, g);

    CHECK(Tensor::max_abs_diff(a.velocity.data, b.velocity.data) <= 1e-12);
    CHECK(Tensor::max_abs_diff(a.bone.data, b.bone.data) <= 1e-12);
    for (std::size_t c = 0; c < 6; ++c) {
        for (std::size_t t = 0; t < 6; ++t) {
            for (std::size_t j = 0; j < 25; ++j) {
                for (std::size_t m = 0; m < 2; ++m) {
                    const double got = b.joint.data.at(c, t, j, m);
                    const double want =
                        a.joint.data.at(c, t, j, m) + (c < 3 ? offset[c] : 0.0);
                    CHECK(std::abs(got - want) <= 1e-12);
                }
            }
        }
    }
}

TEST_CASE("preprocess_all matches the single-branch operations") {
    const GraphSpec g = ntu_graph();
    const FeatureTensor x = random_raw(8, 25, 2, 2025);
    const BranchSet set = preprocess_all(x, g);
    CHECK(Tensor::max_abs_diff(set.joint.data, joint_branch(x, g.center_joint).data) == 0.0);
    CHECK(Tensor::max_abs_diff(set.velocity.data, velocity_branch(x).data) == 0.0);
    CHECK(Tensor::max_abs_diff(set.bone.data, bone_branch(x, g).data) == 0.0);
    CHECK(set.joint.data.shape() == std::vector<std::size_t>{6, 8, 25, 2});
    CHECK(set.velocity.data.shape() == set.joint.data.shape());
    CHECK(set.bone.data.shape() == set.joint.data.shape());
}

TEST_CASE("static input: velocity zero, joint and bone branches carry the pose") {
    const GraphSpec g = ntu_graph();
    const auto pose = synthetic_base_pose();
    Tensor data({3, 4, 25, 1});
    for (std::size_t t = 0; t < 4; ++t) {
        for (std::size_t j = 0; j < 25; ++j) {
            for (std::size_t c = 0; c < 3; ++c) data.at(c, t, j, 0) = pose[j][c];
        }
    }
    const BranchSet set = preprocess_all(FeatureTensor(std::move(data), ChannelSemantics::raw3d), g);
    for (std::size_t i = 0; i < set.velocity.data.size(); ++i) CHECK(set.velocity.data[i] == 0.0);
    double joint_mag = 0.0, bone_mag = 0.0;
    for (std::size_t i = 0; i < set.joint.data.size(); ++i) joint_mag += std::abs(set.joint.data[i]);
    for (std::size_t i = 0; i < set.bone.data.size(); ++i) bone_mag += std::abs(set.bone.data[i]);
    CHECK(joint_mag > 0.0);
    CHECK(bone_mag > 0.0);
}
