#include "spstgcn/serialize.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace spstgcn {

namespace {

static_assert(sizeof(double) == 8, "64-bit doubles required");

constexpr char kTensorMagic[8] = {'S', 'P', 'S', 'T', 'F', 'T', '0', '1'};
constexpr char kAdjMagic[8] = {'S', 'P', 'S', 'T', 'A', 'S', '0', '1'};
constexpr char kCkptMagic[8] = {'S', 'P', 'S', 'T', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCkptVersion = 1;

template <typename T>
void write_le(std::ostream& os, T value) {
    if constexpr (std::endian::native == std::endian::big) {
        auto* b = reinterpret_cast<unsigned char*>(&value);
        std::reverse(b, b + sizeof(T));
    }
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
    T value{};
    is.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!is) throw MalformedFile("unexpected end of binary stream");
    if constexpr (std::endian::native == std::endian::big) {
        auto* b = reinterpret_cast<unsigned char*>(&value);
        std::reverse(b, b + sizeof(T));
    }
    return value;
}

void write_doubles(std::ostream& os, const double* data, std::size_t count) {
    if constexpr (std::endian::native == std::endian::little) {
        os.write(reinterpret_cast<const char*>(data), count * sizeof(double));
    } else {
        for (std::size_t i = 0; i < count; ++i) write_le(os, data[i]);
    }
}

void read_doubles(std::istream& is, double* data, std::size_t count) {
    if constexpr (std::endian::native == std::endian::little) {
        is.read(reinterpret_cast<char*>(data), count * sizeof(double));
        if (!is) throw MalformedFile("unexpected end of binary stream");
    } else {
        for (std::size_t i = 0; i < count; ++i) data[i] = read_le<double>(is);
    }
}

void write_string(std::ostream& os, const std::string& s) {
    write_le<std::uint64_t>(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is) {
    const std::uint64_t len = read_le<std::uint64_t>(is);
    std::string s(len, '\0');
    is.read(s.data(), static_cast<std::streamsize>(len));
    if (!is) throw MalformedFile("unexpected end of binary stream");
    return s;
}

void expect_magic(std::istream& is, const char (&magic)[8], const char* what) {
    char buf[8];
    is.read(buf, 8);
    if (!is || std::memcmp(buf, magic, 8) != 0) {
        throw MalformedFile(std::string("bad magic, not a ") + what + " file");
    }
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    return is;
}

} // namespace

void save_feature_tensor(const std::filesystem::path& path, const FeatureTensor& t) {
    std::ofstream os = open_out(path);
    os.write(kTensorMagic, 8);
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(t.semantics));
    for (std::size_t axis = 0; axis < 4; ++axis) {
        write_le<std::uint32_t>(os, static_cast<std::uint32_t>(t.data.dim(axis)));
    }
    write_doubles(os, t.data.data(), t.data.size());
    if (!os) throw IoError("write failed: " + path.string());
}

FeatureTensor load_feature_tensor(const std::filesystem::path& path) {
    std::ifstream is = open_in(path);
    expect_magic(is, kTensorMagic, "feature tensor");
    const auto sem = static_cast<ChannelSemantics>(read_le<std::uint32_t>(is));
    std::vector<std::size_t> shape(4);
    for (std::size_t axis = 0; axis < 4; ++axis) shape[axis] = read_le<std::uint32_t>(is);
    Tensor data(shape);
    read_doubles(is, data.data(), data.size());
    return FeatureTensor(std::move(data), sem);
}

void save_adjacency_cache(const std::filesystem::path& path,
                          const std::vector<std::pair<std::string, Tensor>>& entries) {
    std::ofstream os = open_out(path);
    os.write(kAdjMagic, 8);
    const std::uint64_t v = entries.empty() ? 0 : entries[0].second.dim(0);
    write_le<std::uint64_t>(os, v);
    write_le<std::uint64_t>(os, entries.size());
    for (const auto& [id, mat] : entries) {
        if (mat.rank() != 2 || mat.dim(0) != v || mat.dim(1) != v) {
            throw ShapeMismatch("adjacency cache: inconsistent matrix shape for " + id);
        }
        write_string(os, id);
        write_doubles(os, mat.data(), mat.size());
    }
    if (!os) throw IoError("write failed: " + path.string());
}

std::vector<std::pair<std::string, Tensor>> load_adjacency_cache(
    const std::filesystem::path& path) {
    std::ifstream is = open_in(path);
    expect_magic(is, kAdjMagic, "adjacency cache");
    const std::uint64_t v = read_le<std::uint64_t>(is);
    const std::uint64_t count = read_le<std::uint64_t>(is);
    std::vector<std::pair<std::string, Tensor>> out;
    out.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        std::string id = read_string(is);
        Tensor mat({v, v});
        read_doubles(is, mat.data(), mat.size());
        out.emplace_back(std::move(id), std::move(mat));
    }
    return out;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    std::ofstream os = open_out(path);
    os.write(kCkptMagic, 8);
    write_le<std::uint32_t>(os, kCkptVersion);
    write_string(os, ckpt.config_text);
    write_le<std::uint64_t>(os, ckpt.blocks.size());
    for (const auto& [name, tensor] : ckpt.blocks) {
        write_string(os, name);
        write_le<std::uint32_t>(os, static_cast<std::uint32_t>(tensor.rank()));
        for (std::size_t axis = 0; axis < tensor.rank(); ++axis) {
            write_le<std::uint64_t>(os, tensor.dim(axis));
        }
        write_doubles(os, tensor.data(), tensor.size());
    }
    if (!os) throw IoError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is = open_in(path);
    expect_magic(is, kCkptMagic, "checkpoint");
    const std::uint32_t version = read_le<std::uint32_t>(is);
    if (version != kCkptVersion) {
        throw MalformedFile("unsupported checkpoint version " + std::to_string(version));
    }
    Checkpoint ckpt;
    ckpt.config_text = read_string(is);
    const std::uint64_t count = read_le<std::uint64_t>(is);
    for (std::uint64_t i = 0; i < count; ++i) {
        std::string name = read_string(is);
        const std::uint32_t rank = read_le<std::uint32_t>(is);
        std::vector<std::size_t> shape(rank);
        for (std::uint32_t axis = 0; axis < rank; ++axis) {
            shape[axis] = static_cast<std::size_t>(read_le<std::uint64_t>(is));
        }
        Tensor t(shape);
        read_doubles(is, t.data(), t.size());
        ckpt.blocks.emplace_back(std::move(name), std::move(t));
    }
    return ckpt;
}

Checkpoint checkpoint_from_model(SpStGcnModel& model) {
    Checkpoint ckpt;
    ckpt.config_text = model_config_to_text(model.config());
    for (DiffTensor* p : model.params()) ckpt.blocks.emplace_back(p->name, p->value);
    return ckpt;
}

void load_into_model(SpStGcnModel& model, const Checkpoint& ckpt) {
    std::map<std::string, const Tensor*> by_name;
    for (const auto& [name, tensor] : ckpt.blocks) by_name[name] = &tensor;
    for (DiffTensor* p : model.params()) {
        const auto it = by_name.find(p->name);
        if (it == by_name.end()) {
            throw MalformedFile("checkpoint missing parameter '" + p->name + "'");
        }
        if (!it->second->same_shape(p->value)) {
            throw ShapeMismatch("checkpoint parameter '" + p->name + "' has shape " +
                                it->second->shape_string() + ", model expects " +
                                p->value.shape_string());
        }
        p->value = *it->second;
    }
}

} // namespace spstgcn
