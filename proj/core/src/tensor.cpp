#include "spstgcn/tensor.hpp"

#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>

namespace spstgcn {

Tensor::Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
    std::size_t n = 1;
    for (std::size_t d : shape_) n *= d;
    data_.assign(n, 0.0);
    init_strides();
}

Tensor::Tensor(std::vector<std::size_t> shape, double fill_value) : Tensor(std::move(shape)) {
    fill(fill_value);
}

Tensor Tensor::identity(std::size_t n) {
    Tensor t({n, n});
    for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
    return t;
}

void Tensor::init_strides() {
    if (shape_.empty()) return;
    stride_.assign(shape_.size() - 1, 1);
    for (std::size_t axis = shape_.size() - 1; axis-- > 0;) {
        std::size_t s = 1;
        for (std::size_t k = axis + 1; k < shape_.size(); ++k) s *= shape_[k];
        stride_[axis] = s;
    }
}

void Tensor::fill(double v) {
    std::fill(data_.begin(), data_.end(), v);
}

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

double Tensor::max_abs_diff(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) {
        throw ShapeMismatch("max_abs_diff: " + a.shape_string() + " vs " + b.shape_string());
    }
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

std::string Tensor::shape_string() const {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) os << ",";
        os << shape_[i];
    }
    os << ")";
    return os.str();
}

std::size_t expected_channels(ChannelSemantics s) {
    switch (s) {
    case ChannelSemantics::raw3d: return 3;
    case ChannelSemantics::joint6:
    case ChannelSemantics::velocity6:
    case ChannelSemantics::bone6: return 6;
    case ChannelSemantics::hidden: return 0; // any
    }
    return 0;
}

std::string to_string(ChannelSemantics s) {
    switch (s) {
    case ChannelSemantics::raw3d: return "raw3d";
    case ChannelSemantics::joint6: return "joint6";
    case ChannelSemantics::velocity6: return "velocity6";
    case ChannelSemantics::bone6: return "bone6";
    case ChannelSemantics::hidden: return "hidden";
    }
    return "?";
}

FeatureTensor::FeatureTensor(Tensor t, ChannelSemantics s) : data(std::move(t)), semantics(s) {
    validate();
}

void FeatureTensor::validate() const {
    if (data.rank() != 4) {
        throw ShapeMismatch("FeatureTensor expects rank-4 (C,T,V,M), got " + data.shape_string());
    }
    const std::size_t want = expected_channels(semantics);
    if (want != 0 && data.dim(0) != want) {
        throw ShapeMismatch("FeatureTensor " + to_string(semantics) + " expects C=" +
                            std::to_string(want) + ", got " + data.shape_string());
    }
    if (!data.all_finite()) {
        throw NonFiniteCoordinate("FeatureTensor contains NaN or Inf");
    }
}

} // namespace spstgcn
