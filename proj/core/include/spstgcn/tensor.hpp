#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "spstgcn/errors.hpp"

namespace spstgcn {

// Dense row-major n-dimensional array of 64-bit floats.
//
// The last axis varies fastest. All network activations use the layout
// (N, C, T, V, M); single-sample feature tensors use (C, T, V, M).
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, double fill);

    static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }
    static Tensor identity(std::size_t n);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_[axis]; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& at(std::size_t i, std::size_t j) { return data_[i * stride_[0] + j]; }
    double at(std::size_t i, std::size_t j) const { return data_[i * stride_[0] + j]; }
    double& at(std::size_t i, std::size_t j, std::size_t k) {
        return data_[i * stride_[0] + j * stride_[1] + k];
    }
    double at(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[i * stride_[0] + j * stride_[1] + k];
    }
    double& at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
        return data_[i * stride_[0] + j * stride_[1] + k * stride_[2] + l];
    }
    double at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
        return data_[i * stride_[0] + j * stride_[1] + k * stride_[2] + l];
    }
    double& at(std::size_t i, std::size_t j, std::size_t k, std::size_t l, std::size_t m) {
        return data_[i * stride_[0] + j * stride_[1] + k * stride_[2] + l * stride_[3] + m];
    }
    double at(std::size_t i, std::size_t j, std::size_t k, std::size_t l, std::size_t m) const {
        return data_[i * stride_[0] + j * stride_[1] + k * stride_[2] + l * stride_[3] + m];
    }

    // Stride of the given axis in elements.
    std::size_t stride(std::size_t axis) const {
        return axis + 1 < shape_.size() ? stride_[axis] : 1;
    }

    void fill(double v);
    void zero() { fill(0.0); }

    bool all_finite() const;
    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    // Max over |a[i] - b[i]|; throws ShapeMismatch on shape disagreement.
    static double max_abs_diff(const Tensor& a, const Tensor& b);

    std::string shape_string() const;

private:
    void init_strides();

    std::vector<std::size_t> shape_;
    std::vector<std::size_t> stride_;
    std::vector<double> data_;
};

// Logical channel interpretation carried through preprocessing and the net.
enum class ChannelSemantics { raw3d, joint6, velocity6, bone6, hidden };

std::size_t expected_channels(ChannelSemantics s);
std::string to_string(ChannelSemantics s);

// Rank-4 (C, T, V, M) tensor plus its channel interpretation.
struct FeatureTensor {
    Tensor data;
    ChannelSemantics semantics = ChannelSemantics::raw3d;

    FeatureTensor() = default;
    FeatureTensor(Tensor t, ChannelSemantics s);

    std::size_t channels() const { return data.dim(0); }
    std::size_t frames() const { return data.dim(1); }
    std::size_t joints() const { return data.dim(2); }
    std::size_t bodies() const { return data.dim(3); }

    // Checks rank, channel count against semantics, and finiteness.
    void validate() const;
};

} // namespace spstgcn
