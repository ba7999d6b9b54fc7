#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "spstgcn/graph.hpp"
#include "spstgcn/tensor.hpp"

namespace spstgcn {

enum class TensorRole { input, parameter, intermediate };

// Value plus same-shape gradient buffer.
struct DiffTensor {
    Tensor value;
    Tensor grad;
    TensorRole role = TensorRole::intermediate;
    std::string name;

    DiffTensor() = default;
    DiffTensor(std::vector<std::size_t> shape, TensorRole r, std::string n)
        : value(shape), grad(std::move(shape)), role(r), name(std::move(n)) {}

    void zero_grad() { grad.zero(); }
};

// Uniform fan-in initialization: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
void init_uniform_fan_in(Tensor& t, std::size_t fan_in, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Layers. All activations are batched (N, C, T, V, M) tensors. Each layer
// caches what its backward pass needs; backward returns the input gradient
// and accumulates parameter gradients.
// ---------------------------------------------------------------------------

// Two-branch graph convolution:
//   spatial:    sum_j W_j f_in (A^_j + B_j)   over hop partitions j
//   structural: M_1 f_in As                   (As is per-sample data)
// combined by element-wise addition.
class SpStGcnLayer {
public:
    SpStGcnLayer(std::size_t c_in, std::size_t c_out, SpatialAdjacency adj, bool structural,
                 std::string name_prefix);

    void init_params(std::mt19937_64& rng);

    // as_batch is (N, V, V); ignored (may be empty) when the structural
    // branch is absent or disabled.
    Tensor forward(const Tensor& x, const Tensor& as_batch);
    Tensor backward(const Tensor& gout);

    // Branch outputs in isolation (same caching rules do not apply; these are
    // forward-only views used by tests and diagnostics).
    Tensor forward_spatial(const Tensor& x) const;
    Tensor forward_structural(const Tensor& x, const Tensor& as_batch) const;

    std::vector<DiffTensor*> params();
    bool has_structural() const { return structural_; }
    bool structural_enabled() const { return structural_ && enabled_; }
    void set_structural_enabled(bool on) { enabled_ = on; }

    std::size_t in_channels() const { return c_in_; }
    std::size_t out_channels() const { return c_out_; }
    std::size_t partitions() const { return adj_.partitions(); }
    const SpatialAdjacency& adjacency() const { return adj_; }

    DiffTensor& spatial_weight(std::size_t j) { return w_[j]; }
    DiffTensor& spatial_mask(std::size_t j) { return b_[j]; }
    DiffTensor& structural_weight() { return m1_; }

private:
    std::size_t c_in_, c_out_;
    SpatialAdjacency adj_;
    bool structural_;
    bool enabled_ = true;
    std::vector<DiffTensor> w_; // per partition (C_out, C_in)
    std::vector<DiffTensor> b_; // per partition (V, V), zero-initialized
    DiffTensor m1_;             // (C_out, C_in)
    Tensor x_cache_;
    Tensor as_cache_;
};

// Per-joint 1D convolution along T with symmetric zero padding.
class TemporalConv {
public:
    TemporalConv(std::size_t c_in, std::size_t c_out, std::size_t kernel, std::size_t stride,
                 std::string name_prefix);

    void init_params(std::mt19937_64& rng);
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& gout);
    std::vector<DiffTensor*> params();

    static std::size_t out_frames(std::size_t t_in, std::size_t kernel, std::size_t stride);

    std::size_t kernel() const { return kernel_; }
    std::size_t stride() const { return stride_; }
    DiffTensor& weight() { return w_; }
    DiffTensor& bias() { return bias_; }

private:
    std::size_t c_in_, c_out_, kernel_, stride_;
    DiffTensor w_; // (C_out, C_in, K)
    DiffTensor bias_;
    Tensor x_cache_;
};

// Batch normalization per channel over (N, T, V, M).
class BatchNorm {
public:
    BatchNorm(std::size_t channels, std::string name_prefix, double momentum = 0.1,
              double eps = 1e-5);

    Tensor forward(const Tensor& x, bool training);
    Tensor backward(const Tensor& gout);
    std::vector<DiffTensor*> params();

    // While refreshing, training-mode forwards replace the EMA update with a
    // cumulative average of batch statistics (used to re-estimate the
    // running stats after training, when the EMA lags the final weights).
    void begin_stats_refresh();
    void end_stats_refresh() { refresh_ = false; }

    DiffTensor& gamma() { return gamma_; }
    DiffTensor& beta() { return beta_; }
    Tensor& running_mean() { return running_mean_; }
    Tensor& running_var() { return running_var_; }

private:
    std::size_t channels_;
    double momentum_, eps_;
    DiffTensor gamma_, beta_;
    Tensor running_mean_, running_var_;
    bool refresh_ = false;
    std::size_t refresh_count_ = 0;
    // caches
    bool trained_forward_ = false;
    Tensor xhat_;
    std::vector<double> inv_std_;
};

class Relu {
public:
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& gout);

private:
    Tensor mask_;
};

// Inverted dropout; identity in eval mode.
class Dropout {
public:
    explicit Dropout(double p) : p_(p) {}
    Tensor forward(const Tensor& x, bool training, std::mt19937_64& rng);
    Tensor backward(const Tensor& gout);
    double probability() const { return p_; }

private:
    double p_;
    bool active_ = false;
    Tensor scale_mask_;
};

// Global average pooling over (T, V) followed by max over body slots:
// (N, C, T, V, M) -> (N, C).
class GlobalPool {
public:
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& gout);

private:
    std::vector<std::size_t> in_shape_;
    std::vector<std::size_t> argmax_m_;
};

// Fully connected: (N, C) -> (N, K).
class Linear {
public:
    Linear(std::size_t c_in, std::size_t c_out, std::string name_prefix);

    void init_params(std::mt19937_64& rng);
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& gout);
    std::vector<DiffTensor*> params();

    DiffTensor& weight() { return w_; }
    DiffTensor& bias() { return bias_; }

private:
    std::size_t c_in_, c_out_;
    DiffTensor w_; // (K, C)
    DiffTensor bias_;
    Tensor x_cache_;
};

// GCN block: SpSt-GCN layer -> BN -> ReLU -> temporal conv -> residual add.
// The residual is projected (1x1, strided) when channels or stride differ.
class GcnBlock {
public:
    GcnBlock(std::size_t c_in, std::size_t c_out, std::size_t stride, std::size_t kernel,
             const SpatialAdjacency& adj, bool structural, std::string name_prefix);

    void init_params(std::mt19937_64& rng);
    Tensor forward(const Tensor& x, const Tensor& as_batch, bool training);
    Tensor backward(const Tensor& gout);
    std::vector<DiffTensor*> params();

    SpStGcnLayer& gcn() { return gcn_; }
    TemporalConv& tconv() { return tconv_; }
    BatchNorm& bn() { return bn_; }
    std::size_t stride() const { return stride_; }
    bool has_projection() const { return proj_.has_value(); }
    DiffTensor* projection() { return proj_ ? &*proj_ : nullptr; }

private:
    std::size_t c_in_, c_out_, stride_;
    SpStGcnLayer gcn_;
    BatchNorm bn_;
    Relu relu_;
    TemporalConv tconv_;
    std::optional<DiffTensor> proj_; // (C_out, C_in) linear map on the residual path
    Tensor x_cache_;
};

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

struct StageSpec {
    std::size_t c_in = 0;
    std::size_t c_out = 0;
    std::size_t stride = 1;
};

struct ModelConfig {
    std::vector<StageSpec> stages; // initial block first
    std::size_t temporal_kernel = 5;
    double dropout = 0.25;
    std::size_t num_classes = 0;
    bool structural = true;
    std::size_t joints = 25;
    std::size_t bodies = 2;
    std::size_t input_frames = 64;
    std::size_t input_channels = 6;
    int max_hop = 2;
    double alpha = 1e-3;

    // Initial block 6->32, then 32->32, 32->48 (/2), 48->48, 48->64 (/2).
    static ModelConfig defaults(std::size_t num_classes);
    // Narrow plan sized for CPU desk-scale experiments.
    static ModelConfig desk(std::size_t num_classes);

    void validate() const;
    std::size_t output_frames() const;
};

std::string model_config_to_text(const ModelConfig& cfg);
ModelConfig model_config_from_text(const std::string& text);

// Initial block, stacked GCN blocks, GAP + body max, dropout, FC classifier.
class SpStGcnModel {
public:
    SpStGcnModel(ModelConfig cfg, const GraphSpec& graph, std::uint64_t seed);

    // x: (N, C_in, T, V, M); as_batch: (N, V, V) (may be empty when the
    // structural branch is off). Returns logits (N, num_classes).
    Tensor forward(const Tensor& x, const Tensor& as_batch);
    // Accumulates parameter gradients; returns the input gradient.
    Tensor backward(const Tensor& dlogits);

    std::vector<DiffTensor*> params();
    void zero_grad();

    void set_training(bool training) { training_ = training; }
    bool training() const { return training_; }
    // Runtime ablation toggle; with the branch off the forward pass is the
    // spatial-only Sp-GCN, bit for bit.
    void set_structural_enabled(bool on);

    // Re-estimates every BatchNorm's running statistics: bracketed around
    // training-mode forward passes over representative batches.
    void begin_bn_refresh();
    void end_bn_refresh();

    const ModelConfig& config() const { return cfg_; }
    std::mt19937_64& dropout_rng() { return rng_; }
    std::vector<GcnBlock>& blocks() { return blocks_; }
    Linear& classifier() { return fc_; }

    // Mean pairwise cosine similarity between edge-node feature columns after
    // the final block (over-smoothing diagnostic; higher = more smoothed).
    double edge_node_smoothing(const Tensor& x, const Tensor& as_batch,
                               const std::vector<int>& edge_nodes);

private:
    ModelConfig cfg_;
    std::vector<GcnBlock> blocks_;
    GlobalPool pool_;
    Dropout dropout_;
    Linear fc_;
    bool training_ = false;
    std::mt19937_64 rng_;
};

// Stacks per-sample tensors (C,T,V,M) and V x V matrices into batch tensors.
Tensor stack_batch(const std::vector<const Tensor*>& samples);
Tensor stack_adjacency(const std::vector<const Tensor*>& matrices);

// ---------------------------------------------------------------------------
// Loss
// ---------------------------------------------------------------------------

struct LossResult {
    double value = 0.0;  // mean cross-entropy over the batch
    Tensor grad_logits;  // d value / d logits, (N, K)
};

// Softmax cross-entropy, stabilized by max subtraction.
LossResult cross_entropy_loss(const Tensor& logits, const std::vector<int>& labels);
LossResult cross_entropy_loss(const Tensor& logits, int label);

// ---------------------------------------------------------------------------
// Gradient checking
// ---------------------------------------------------------------------------

struct GradCheckEntry {
    std::string name;
    double max_rel_error = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    double worst = 0.0;

    bool within(double tol) const { return worst <= tol; }
};

// Compares each tensor's current .grad (analytic, produced by a prior
// backward pass) against central finite differences of loss_fn. The relative
// error is taken against the largest gradient magnitude in the tensor.
GradCheckReport grad_check(const std::function<double()>& loss_fn,
                           const std::vector<DiffTensor*>& tensors, double step = 1e-5);

// Prebuilt checks on tiny random instances.
GradCheckReport grad_check_spst_layer(std::uint64_t seed, double step = 1e-5);
GradCheckReport grad_check_temporal_conv(std::uint64_t seed, double step = 1e-5);
GradCheckReport grad_check_block(std::uint64_t seed, double step = 1e-5);
GradCheckReport grad_check_model(std::uint64_t seed, double step = 1e-5);
GradCheckReport grad_check_loss(std::uint64_t seed, double step = 1e-5);

} // namespace spstgcn
