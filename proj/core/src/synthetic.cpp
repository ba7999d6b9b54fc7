#include "spstgcn/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace spstgcn {

namespace {

// NTU joint indices (0-based) used by the motion programs.
constexpr int kHead = 3;
constexpr int kLeftTip = 21;
constexpr int kRightTip = 23;
constexpr int kLeftFoot = 15;
constexpr int kRightFoot = 19;

struct Waveform {
    double amplitude;
    double frequency;
    double phase;

    double eval(double t01) const {
        return amplitude * std::sin(2.0 * std::numbers::pi * frequency * t01 + phase);
    }
};

Waveform draw_waveform(std::mt19937_64& rng, double freq_lo = 1.0, double freq_hi = 2.5) {
    std::uniform_real_distribution<double> amp(0.25, 0.40);
    std::uniform_real_distribution<double> freq(freq_lo, freq_hi);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    return {amp(rng), freq(rng), phase(rng)};
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 step over (seed, index)
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

std::vector<std::array<double, 3>> synthetic_base_pose() {
    std::vector<std::array<double, 3>> p(25);
    p[0] = {0.00, 0.95, 0.00};   // base of spine
    p[1] = {0.00, 1.17, 0.00};   // middle of spine
    p[20] = {0.00, 1.40, 0.00};  // spine
    p[2] = {0.00, 1.50, 0.00};   // neck
    p[3] = {0.00, 1.65, 0.00};   // head
    p[4] = {0.18, 1.42, 0.00};   // left shoulder
    p[5] = {0.26, 1.16, 0.00};   // left elbow
    p[6] = {0.28, 0.94, 0.00};   // left wrist
    p[7] = {0.29, 0.86, 0.00};   // left hand
    p[21] = {0.30, 0.78, 0.00};  // left hand tip
    p[22] = {0.25, 0.82, 0.04};  // left thumb
    p[8] = {-0.18, 1.42, 0.00};  // right shoulder
    p[9] = {-0.26, 1.16, 0.00};  // right elbow
    p[10] = {-0.28, 0.94, 0.00}; // right wrist
    p[11] = {-0.29, 0.86, 0.00}; // right hand
    p[23] = {-0.30, 0.78, 0.00}; // right hand tip
    p[24] = {-0.25, 0.82, 0.04}; // right thumb
    p[12] = {0.09, 0.90, 0.00};  // left hip
    p[13] = {0.10, 0.50, 0.00};  // left knee
    p[14] = {0.10, 0.08, 0.00};  // left ankle
    p[15] = {0.12, 0.02, 0.12};  // left foot
    p[16] = {-0.09, 0.90, 0.00}; // right hip
    p[17] = {-0.10, 0.50, 0.00}; // right knee
    p[18] = {-0.10, 0.08, 0.00}; // right ankle
    p[19] = {-0.12, 0.02, 0.12}; // right foot
    return p;
}

std::string to_string(MotionProgram p) {
    switch (p) {
    case MotionProgram::hands_converge: return "hands_converge";
    case MotionProgram::hands_independent: return "hands_independent";
    case MotionProgram::hands_sync: return "hands_sync";
    case MotionProgram::foot_oscillate: return "foot_oscillate";
    }
    return "?";
}

MotionProgram motion_program_from_string(const std::string& name) {
    if (name == "hands_converge") return MotionProgram::hands_converge;
    if (name == "hands_independent") return MotionProgram::hands_independent;
    if (name == "hands_sync") return MotionProgram::hands_sync;
    if (name == "foot_oscillate") return MotionProgram::foot_oscillate;
    throw InvalidSpec("unknown motion program '" + name + "'");
}

SyntheticDataset generate_synthetic_dataset(const SyntheticSpec& spec, std::uint64_t seed) {
    if (spec.classes.size() < 2) {
        throw InvalidSpec("synthetic spec needs at least 2 classes");
    }
    if (spec.samples_per_class == 0) throw InvalidSpec("samples_per_class must be positive");
    if (spec.frames < 3) throw InvalidSpec("frames must be >= 3");
    if (spec.bodies == 0) throw InvalidSpec("bodies must be >= 1");

    const auto base = synthetic_base_pose();
    const std::size_t t_len = spec.frames;
    const std::size_t v = base.size();

    SyntheticDataset out;
    out.tensors.reserve(spec.classes.size() * spec.samples_per_class);
    out.labels.reserve(out.tensors.capacity());

    std::size_t sample_index = 0;
    for (std::size_t cls = 0; cls < spec.classes.size(); ++cls) {
        for (std::size_t s = 0; s < spec.samples_per_class; ++s, ++sample_index) {
            std::mt19937_64 rng(mix_seed(seed, sample_index));
            std::normal_distribution<double> jitter(0.0, spec.noise);

            // Per-frame displacement of each moving joint, meters.
            std::vector<std::array<double, 3>> left(t_len, {0, 0, 0});
            std::vector<std::array<double, 3>> right(t_len, {0, 0, 0});
            std::vector<std::array<double, 3>> foot(t_len, {0, 0, 0});

            const MotionProgram program = spec.classes[cls];
            switch (program) {
            case MotionProgram::hands_converge: {
                // Tips travel toward a meeting point in front of the chest;
                // the speed profile is randomized per sample.
                std::uniform_real_distribution<double> gamma(0.7, 1.4);
                std::uniform_real_distribution<double> frac(0.85, 0.95);
                const double gam = gamma(rng);
                const double reach = frac(rng);
                const std::array<double, 3> meet = {0.0, 1.10, 0.25};
                for (std::size_t t = 0; t < t_len; ++t) {
                    const double t01 = t_len > 1 ? double(t) / double(t_len - 1) : 0.0;
                    const double a = reach * std::pow(t01, gam);
                    for (int c = 0; c < 3; ++c) {
                        left[t][c] = a * (meet[c] - base[kLeftTip][c]);
                        right[t][c] = a * (meet[c] - base[kRightTip][c]);
                    }
                }
                break;
            }
            case MotionProgram::hands_independent: {
                // disjoint frequency bands keep the two hands desynchronized
                // for every draw; which hand is fast flips per sample
                Waveform wl = draw_waveform(rng, 0.8, 1.4);
                Waveform wr = draw_waveform(rng, 2.2, 3.0);
                if (rng() & 1u) std::swap(wl, wr);
                for (std::size_t t = 0; t < t_len; ++t) {
                    const double t01 = t_len > 1 ? double(t) / double(t_len - 1) : 0.0;
                    left[t][1] = wl.eval(t01);
                    right[t][1] = wr.eval(t01);
                }
                break;
            }
            case MotionProgram::hands_sync: {
                // one shared waveform from either band, so each hand's
                // marginal matches the independent class and only the
                // cross-hand correlation separates the two
                const bool low_band = (rng() & 1u) != 0;
                const Waveform w = low_band ? draw_waveform(rng, 0.8, 1.4)
                                            : draw_waveform(rng, 2.2, 3.0);
                for (std::size_t t = 0; t < t_len; ++t) {
                    const double t01 = t_len > 1 ? double(t) / double(t_len - 1) : 0.0;
                    left[t][1] = w.eval(t01);
                    right[t][1] = w.eval(t01);
                }
                break;
            }
            case MotionProgram::foot_oscillate: {
                const Waveform w = draw_waveform(rng);
                for (std::size_t t = 0; t < t_len; ++t) {
                    const double t01 = t_len > 1 ? double(t) / double(t_len - 1) : 0.0;
                    const double s = w.eval(t01);
                    foot[t][1] = 0.4 * s;
                    foot[t][2] = 0.9 * s;
                }
                break;
            }
            }

            Tensor data({3, t_len, v, spec.bodies});
            for (std::size_t t = 0; t < t_len; ++t) {
                for (std::size_t j = 0; j < v; ++j) {
                    std::array<double, 3> pos = base[j];
                    if (static_cast<int>(j) == kLeftTip) {
                        for (int c = 0; c < 3; ++c) pos[c] += left[t][c];
                    } else if (static_cast<int>(j) == kRightTip) {
                        for (int c = 0; c < 3; ++c) pos[c] += right[t][c];
                    } else if (static_cast<int>(j) == kLeftFoot) {
                        for (int c = 0; c < 3; ++c) pos[c] += foot[t][c];
                    }
                    for (std::size_t c = 0; c < 3; ++c) {
                        data.at(c, t, j, 0) = pos[c] + jitter(rng);
                    }
                }
            }
            out.tensors.emplace_back(std::move(data), ChannelSemantics::raw3d);
            out.labels.push_back(static_cast<int>(cls));
        }
    }
    return out;
}

SkeletonSequence tensor_to_sequence(const FeatureTensor& raw, std::string source_id) {
    if (raw.semantics != ChannelSemantics::raw3d) {
        throw ShapeMismatch("tensor_to_sequence expects a raw3d tensor");
    }
    SkeletonSequence seq;
    seq.joint_count = raw.joints();
    seq.body_capacity = raw.bodies();
    seq.source_id = std::move(source_id);
    for (std::size_t t = 0; t < raw.frames(); ++t) {
        FrameRecord frame;
        for (std::size_t m = 0; m < raw.bodies(); ++m) {
            // all-zero slices are padding, not bodies
            bool nonzero = false;
            for (std::size_t j = 0; j < raw.joints() && !nonzero; ++j) {
                for (std::size_t c = 0; c < 3; ++c) {
                    if (raw.data.at(c, t, j, m) != 0.0) {
                        nonzero = true;
                        break;
                    }
                }
            }
            if (!nonzero) continue;
            BodyRecord body;
            body.body_id = static_cast<std::int64_t>(m);
            body.joints.resize(raw.joints());
            for (std::size_t j = 0; j < raw.joints(); ++j) {
                for (std::size_t c = 0; c < 3; ++c) {
                    body.joints[j][c] = raw.data.at(c, t, j, m);
                }
            }
            frame.bodies.push_back(std::move(body));
        }
        seq.frames.push_back(std::move(frame));
    }
    return seq;
}

} // namespace spstgcn
