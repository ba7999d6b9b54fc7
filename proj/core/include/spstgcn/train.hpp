#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "spstgcn/nn.hpp"
#include "spstgcn/preprocess.hpp"
#include "spstgcn/serialize.hpp"
#include "spstgcn/struct_adj.hpp"

namespace spstgcn {

// ---------------------------------------------------------------------------
// Optimizer: SGD with Nesterov momentum and coupled weight decay.
//   g <- grad + weight_decay * p
//   v <- momentum * v + g
//   p <- p - lr * (g + momentum * v)
// ---------------------------------------------------------------------------

struct OptimState {
    double momentum = 0.9;
    double weight_decay = 1e-4;
    bool nesterov = true;
    std::vector<Tensor> velocity; // one buffer per parameter, allocated lazily
};

void sgd_nesterov_step(const std::vector<DiffTensor*>& params, OptimState& state, double lr);

// ---------------------------------------------------------------------------
// Learning-rate schedule: constant warm phase, then cosine decay to zero.
// ---------------------------------------------------------------------------

struct Schedule {
    double base_lr = 0.1;
    int warm_epochs = 10;
    int total_epochs = 50;

    double lr(int epoch) const; // epoch is 1-based
};

// lr = base for epoch <= warm; 0.5*base*(1 + cos(pi*(e-warm)/(total-warm))) after.
double cosine_lr(int epoch, const Schedule& schedule = {});

// ---------------------------------------------------------------------------
// Dataset plumbing
// ---------------------------------------------------------------------------

enum class Branch { joint, velocity, bone };

std::string to_string(Branch b);
Branch branch_from_string(const std::string& name);

// One ready-to-train sample: the three preprocessed branches, the per-sample
// structural matrix, and the label.
struct TrainSample {
    BranchSet branches;
    Tensor as; // V x V
    int label = 0;
    std::string id;
};

const FeatureTensor& branch_of(const TrainSample& s, Branch b);

// Preprocess + structural adjacency for a set of raw coordinate tensors.
std::vector<TrainSample> prepare_samples(const std::vector<FeatureTensor>& raw,
                                         const std::vector<int>& labels, const GraphSpec& g,
                                         const StructAdjConfig& cfg = {}, unsigned jobs = 1);

// ---------------------------------------------------------------------------
// Training / evaluation
// ---------------------------------------------------------------------------

struct TrainConfig {
    int epochs = 50;
    int batch_size = 16;
    Schedule schedule;
    double momentum = 0.9;
    double weight_decay = 1e-4;
    double dropout = 0.25;
    // stop once the epoch's training accuracy reaches this level (<= 0 disables)
    double early_stop_train_acc = -1.0;
    // evaluate every k-th epoch (and on the final one); 0 disables per-epoch eval
    int eval_every = 1;
};

struct EpochRecord {
    int epoch = 0;
    std::string branch;
    std::string split; // "train" or "eval"
    double loss = 0.0;
    double accuracy = 0.0;
    double lr = 0.0;
};

struct RunMetrics {
    std::vector<EpochRecord> records;
    double wall_seconds = 0.0;
};

void write_metrics(std::ostream& os, const RunMetrics& metrics);

// Trains one model on one branch. Deterministic for a fixed seed under
// single-threaded execution.
RunMetrics train_branch(SpStGcnModel& model, const std::vector<TrainSample>& train_set,
                        const std::vector<TrainSample>& eval_set, Branch branch,
                        const TrainConfig& cfg, std::uint64_t seed);

// Logits for every sample, eval mode, batched.
Tensor eval_logits(SpStGcnModel& model, const std::vector<TrainSample>& samples, Branch branch,
                   int batch_size = 16);

// One model per input branch, identical schedule; branch b uses seed + b.
struct BranchOutcome {
    Branch branch = Branch::joint;
    Checkpoint checkpoint;
    RunMetrics metrics;
    Tensor train_logits; // eval-mode logits on the training set
    Tensor eval_logits;  // empty when no eval set was given
};

struct TrainResult {
    std::vector<BranchOutcome> branches;
    Tensor fused_train; // summed branch logits
    Tensor fused_eval;
};

TrainResult train(const ModelConfig& cfg, const GraphSpec& graph,
                  const std::vector<TrainSample>& train_set,
                  const std::vector<TrainSample>& eval_set, const TrainConfig& tc,
                  std::uint64_t seed);

double accuracy_from_logits(const Tensor& logits, const std::vector<int>& labels);

// Element-wise sum of per-branch logit matrices.
Tensor fuse_scores(const std::vector<const Tensor*>& branch_logits);

// argmax with lowest-index tie-breaking
std::vector<int> predict(const Tensor& logits);

// ---------------------------------------------------------------------------
// Complexity accounting (parameters and forward multiply-adds)
// ---------------------------------------------------------------------------

struct LayerComplexity {
    std::string name;
    std::size_t params = 0;
    std::size_t macs = 0; // forward multiply-accumulate operations
};

struct ComplexityReport {
    std::vector<LayerComplexity> layers;
    std::size_t params_total = 0;
    std::size_t macs_total = 0;
    std::size_t params_structural = 0; // sum over layers of C_in * C_out
    std::size_t macs_structural = 0;

    std::size_t params_spatial_only() const { return params_total - params_structural; }
    std::size_t macs_spatial_only() const { return macs_total - macs_structural; }
    double param_overhead() const;
    double macs_overhead() const;
};

// Analytic counts for the configured model (per-sample forward pass).
ComplexityReport count_params_flops(const ModelConfig& cfg);

// Reference overheads reported for the full-scale architecture; printed for
// side-by-side comparison, not asserted (the block internals here differ).
inline constexpr double kReferenceFlopsOverheadPercent = 15.3;
inline constexpr double kReferenceParamsOverheadPercent = 9.1;

void print_complexity(std::ostream& os, const ComplexityReport& spst, const ModelConfig& cfg);

} // namespace spstgcn
