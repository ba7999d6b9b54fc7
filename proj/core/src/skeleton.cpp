#include "spstgcn/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace spstgcn {

namespace {

// Reads the next non-empty line; throws MalformedFile at EOF.
std::string next_line(std::istream& is, const std::string& context) {
    std::string line;
    while (std::getline(is, line)) {
        // tolerate \r\n input
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) return line;
    }
    throw MalformedFile("unexpected end of file while reading " + context);
}

long long parse_int(const std::string& token, const std::string& context) {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(token, &pos);
        if (pos != token.size()) throw std::invalid_argument(token);
        return v;
    } catch (const std::exception&) {
        throw MalformedFile("expected integer for " + context + ", got '" + token + "'");
    }
}

double parse_coord(const std::string& token, const std::string& context) {
    double v = 0.0;
    try {
        std::size_t pos = 0;
        v = std::stod(token, &pos);
        if (pos != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
        throw MalformedFile("expected number for " + context + ", got '" + token + "'");
    }
    if (!std::isfinite(v)) {
        throw NonFiniteCoordinate("non-finite coordinate in " + context);
    }
    return v;
}

std::vector<std::string> tokenize(const std::string& line) {
    std::istringstream ls(line);
    std::vector<std::string> out;
    std::string tok;
    while (ls >> tok) out.push_back(tok);
    return out;
}

} // namespace

void SkeletonSequence::validate() const {
    for (std::size_t f = 0; f < frames.size(); ++f) {
        if (frames[f].bodies.size() > body_capacity) {
            throw Error("frame " + std::to_string(f) + " exceeds body capacity");
        }
        for (const BodyRecord& b : frames[f].bodies) {
            if (b.joints.size() != joint_count) {
                throw Error("frame " + std::to_string(f) + ": body has " +
                            std::to_string(b.joints.size()) + " joints, expected " +
                            std::to_string(joint_count));
            }
            for (const auto& j : b.joints) {
                if (!std::isfinite(j[0]) || !std::isfinite(j[1]) || !std::isfinite(j[2])) {
                    throw NonFiniteCoordinate("non-finite joint coordinate");
                }
            }
        }
    }
}

SkeletonSequence parse_ntu_skeleton(std::istream& input, std::string source_id,
                                    std::size_t joint_count) {
    SkeletonSequence seq;
    seq.joint_count = joint_count;
    seq.source_id = std::move(source_id);

    const long long frame_count =
        parse_int(next_line(input, "frame count"), "frame count");
    if (frame_count < 0) throw MalformedFile("negative frame count");

    for (long long f = 0; f < frame_count; ++f) {
        const std::string fctx = "frame " + std::to_string(f);
        const long long body_count =
            parse_int(next_line(input, fctx + " body count"), fctx + " body count");
        if (body_count < 0) throw MalformedFile(fctx + ": negative body count");

        FrameRecord frame;
        for (long long b = 0; b < body_count; ++b) {
            const std::string bctx = fctx + " body " + std::to_string(b);
            const auto header = tokenize(next_line(input, bctx + " header"));
            if (header.empty()) throw MalformedFile(bctx + ": empty body header");
            BodyRecord body;
            body.body_id = parse_int(header[0], bctx + " id");

            const long long jcount =
                parse_int(next_line(input, bctx + " joint count"), bctx + " joint count");
            if (jcount != static_cast<long long>(joint_count)) {
                throw MalformedFile(bctx + ": declared " + std::to_string(jcount) +
                                    " joints, expected " + std::to_string(joint_count));
            }
            body.joints.reserve(joint_count);
            for (long long j = 0; j < jcount; ++j) {
                const std::string jctx = bctx + " joint " + std::to_string(j);
                const auto fields = tokenize(next_line(input, jctx));
                if (fields.size() < 3) {
                    throw MalformedFile(jctx + ": expected at least 3 fields, got " +
                                        std::to_string(fields.size()));
                }
                body.joints.push_back({parse_coord(fields[0], jctx + " x"),
                                       parse_coord(fields[1], jctx + " y"),
                                       parse_coord(fields[2], jctx + " z")});
            }
            frame.bodies.push_back(std::move(body));
        }
        seq.frames.push_back(std::move(frame));
    }

    // Declared frame count must match: any trailing non-blank content means
    // the header undercounted, premature EOF above means it overcounted.
    std::string rest;
    while (std::getline(input, rest)) {
        if (!rest.empty() && rest.back() == '\r') rest.pop_back();
        if (!rest.empty()) {
            throw MalformedFile("trailing content after declared " +
                                std::to_string(frame_count) + " frames");
        }
    }
    return seq;
}

SkeletonSequence parse_ntu_skeleton_file(const std::filesystem::path& path,
                                         std::size_t joint_count) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    try {
        return parse_ntu_skeleton(is, path.stem().string(), joint_count);
    } catch (const Error& e) {
        throw MalformedFile(path.string() + ": " + e.what());
    }
}

void write_ntu_skeleton(std::ostream& os, const SkeletonSequence& seq) {
    os.precision(17); // round-trips doubles exactly
    os << seq.frames.size() << "\n";
    for (const FrameRecord& frame : seq.frames) {
        os << frame.bodies.size() << "\n";
        for (const BodyRecord& body : frame.bodies) {
            os << body.body_id << " 0 0 0 0 0 0 0 0 0\n";
            os << body.joints.size() << "\n";
            for (const auto& j : body.joints) {
                os << j[0] << " " << j[1] << " " << j[2] << " 0 0 0 0 0 0 0 0 0\n";
            }
        }
    }
}

double motion_energy(const SkeletonSequence& seq, std::int64_t body_id) {
    double energy = 0.0;
    const std::vector<std::array<double, 3>>* prev = nullptr;
    for (const FrameRecord& frame : seq.frames) {
        const std::vector<std::array<double, 3>>* cur = nullptr;
        for (const BodyRecord& b : frame.bodies) {
            if (b.body_id == body_id) {
                cur = &b.joints;
                break;
            }
        }
        if (prev && cur) {
            for (std::size_t j = 0; j < cur->size(); ++j) {
                for (int c = 0; c < 3; ++c) {
                    const double d = (*cur)[j][c] - (*prev)[j][c];
                    energy += d * d;
                }
            }
        }
        prev = cur;
    }
    return energy;
}

FeatureTensor to_tensor(const SkeletonSequence& seq, std::size_t target_frames,
                        std::size_t body_slots) {
    if (target_frames == 0) throw Error("to_tensor: target_frames must be >= 1");
    const std::size_t v = seq.joint_count;

    bool any_body = false;
    for (const FrameRecord& f : seq.frames) {
        if (!f.bodies.empty()) {
            any_body = true;
            break;
        }
    }
    if (!any_body) throw EmptySequence("to_tensor: no frame contains a body");

    // Rank bodies by descending motion energy; ties keep first-appearance order.
    std::vector<std::int64_t> ids;
    for (const FrameRecord& f : seq.frames) {
        for (const BodyRecord& b : f.bodies) {
            if (std::find(ids.begin(), ids.end(), b.body_id) == ids.end()) {
                ids.push_back(b.body_id);
            }
        }
    }
    std::vector<double> energy(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) energy[i] = motion_energy(seq, ids[i]);
    std::vector<std::size_t> order(ids.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return energy[a] > energy[b]; });
    if (order.size() > body_slots) order.resize(body_slots);

    // Uniform subsample (floor(i * T / target)) or tail zero-pad.
    const std::size_t t_in = seq.frames.size();
    std::vector<std::size_t> frame_index(target_frames, t_in); // t_in = padded slot
    if (t_in >= target_frames) {
        for (std::size_t i = 0; i < target_frames; ++i) frame_index[i] = i * t_in / target_frames;
    } else {
        for (std::size_t i = 0; i < t_in; ++i) frame_index[i] = i;
    }

    Tensor data({3, target_frames, v, body_slots});
    for (std::size_t slot = 0; slot < order.size(); ++slot) {
        const std::int64_t id = ids[order[slot]];
        for (std::size_t t = 0; t < target_frames; ++t) {
            if (frame_index[t] >= t_in) continue;
            const FrameRecord& frame = seq.frames[frame_index[t]];
            const BodyRecord* body = nullptr;
            for (const BodyRecord& b : frame.bodies) {
                if (b.body_id == id) {
                    body = &b;
                    break;
                }
            }
            if (!body) continue;
            for (std::size_t j = 0; j < v; ++j) {
                for (std::size_t c = 0; c < 3; ++c) {
                    data.at(c, t, j, slot) = body->joints[j][c];
                }
            }
        }
    }
    return FeatureTensor(std::move(data), ChannelSemantics::raw3d);
}

void DatasetManifest::validate(int num_classes) const {
    std::set<std::string> seen;
    for (const ManifestEntry& e : entries) {
        if (!seen.insert(e.path).second) {
            throw MalformedFile("manifest: duplicate path '" + e.path + "'");
        }
        if (e.label < 0 || (num_classes >= 0 && e.label >= num_classes)) {
            throw LabelOutOfRange("manifest: label " + std::to_string(e.label) +
                                  " out of range for '" + e.path + "'");
        }
    }
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    DatasetManifest m;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            std::size_t tab = line.find('\t', start);
            fields.push_back(line.substr(start, tab == std::string::npos ? tab : tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (fields.size() != 4) {
            throw MalformedFile(path.string() + ":" + std::to_string(lineno) +
                                ": expected path<TAB>label<TAB>subject<TAB>camera");
        }
        ManifestEntry e;
        e.path = fields[0];
        e.label = static_cast<int>(parse_int(fields[1], "manifest label"));
        e.subject_id = static_cast<int>(parse_int(fields[2], "manifest subject"));
        e.camera_id = static_cast<int>(parse_int(fields[3], "manifest camera"));
        m.entries.push_back(std::move(e));
    }
    m.validate();
    return m;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    for (const ManifestEntry& e : manifest.entries) {
        os << e.path << "\t" << e.label << "\t" << e.subject_id << "\t" << e.camera_id << "\n";
    }
}

std::pair<std::vector<ManifestEntry>, std::vector<ManifestEntry>>
split_manifest(const DatasetManifest& manifest, const std::vector<int>& train_ids) {
    std::vector<ManifestEntry> train, eval;
    for (const ManifestEntry& e : manifest.entries) {
        int key = 0;
        switch (manifest.split_rule) {
        case SplitRule::by_subject: key = e.subject_id; break;
        case SplitRule::by_camera: key = e.camera_id; break;
        case SplitRule::explicit_list:
            train.push_back(e);
            continue;
        }
        if (std::find(train_ids.begin(), train_ids.end(), key) != train_ids.end()) {
            train.push_back(e);
        } else {
            eval.push_back(e);
        }
    }
    return {std::move(train), std::move(eval)};
}

} // namespace spstgcn
