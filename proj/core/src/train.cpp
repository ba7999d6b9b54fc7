#include "spstgcn/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

namespace spstgcn {

// ---------------------------------------------------------------------------
// Optimizer
// ---------------------------------------------------------------------------

void sgd_nesterov_step(const std::vector<DiffTensor*>& params, OptimState& state, double lr) {
    if (state.velocity.empty()) {
        state.velocity.reserve(params.size());
        for (const DiffTensor* p : params) state.velocity.emplace_back(p->value.shape());
    }
    if (state.velocity.size() != params.size()) {
        throw ShapeMismatch("sgd_nesterov_step: parameter count changed");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        DiffTensor& p = *params[i];
        Tensor& v = state.velocity[i];
        if (!v.same_shape(p.value) || !p.grad.same_shape(p.value)) {
            throw ShapeMismatch("sgd_nesterov_step: buffer shape mismatch for " + p.name);
        }
        for (std::size_t k = 0; k < v.size(); ++k) {
            const double g = p.grad[k] + state.weight_decay * p.value[k];
            v[k] = state.momentum * v[k] + g;
            const double update = state.nesterov ? g + state.momentum * v[k] : v[k];
            p.value[k] -= lr * update;
        }
    }
}

// ---------------------------------------------------------------------------
// Schedule
// ---------------------------------------------------------------------------

double Schedule::lr(int epoch) const {
    if (epoch <= warm_epochs) return base_lr;
    const double span = static_cast<double>(total_epochs - warm_epochs);
    const double phase =
        std::min(1.0, static_cast<double>(epoch - warm_epochs) / std::max(span, 1.0));
    return 0.5 * base_lr * (1.0 + std::cos(std::numbers::pi * phase));
}

double cosine_lr(int epoch, const Schedule& schedule) { return schedule.lr(epoch); }

// ---------------------------------------------------------------------------
// Dataset plumbing
// ---------------------------------------------------------------------------

std::string to_string(Branch b) {
    switch (b) {
    case Branch::joint: return "joint";
    case Branch::velocity: return "velocity";
    case Branch::bone: return "bone";
    }
    return "?";
}

Branch branch_from_string(const std::string& name) {
    if (name == "joint") return Branch::joint;
    if (name == "velocity") return Branch::velocity;
    if (name == "bone") return Branch::bone;
    throw Error("unknown branch '" + name + "'");
}

const FeatureTensor& branch_of(const TrainSample& s, Branch b) {
    switch (b) {
    case Branch::joint: return s.branches.joint;
    case Branch::velocity: return s.branches.velocity;
    case Branch::bone: return s.branches.bone;
    }
    return s.branches.joint;
}

std::vector<TrainSample> prepare_samples(const std::vector<FeatureTensor>& raw,
                                         const std::vector<int>& labels, const GraphSpec& g,
                                         const StructAdjConfig& cfg, unsigned jobs) {
    if (raw.size() != labels.size()) {
        throw ShapeMismatch("prepare_samples: label count mismatch");
    }
    const std::vector<StructuralAdjacency> as = precompute_structural(raw, g, cfg, jobs);
    std::vector<TrainSample> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        out[i].branches = preprocess_all(raw[i], g);
        out[i].as = as[i].as;
        out[i].label = labels[i];
        out[i].id = "sample" + std::to_string(i);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Training / evaluation
// ---------------------------------------------------------------------------

namespace {

struct BatchView {
    Tensor inputs; // (B, C, T, V, M)
    Tensor as;     // (B, V, V)
    std::vector<int> labels;
};

BatchView make_batch(const std::vector<TrainSample>& samples, const std::vector<std::size_t>& idx,
                     std::size_t begin, std::size_t end, Branch branch) {
    std::vector<const Tensor*> inputs, mats;
    BatchView batch;
    for (std::size_t i = begin; i < end; ++i) {
        const TrainSample& s = samples[idx[i]];
        inputs.push_back(&branch_of(s, branch).data);
        mats.push_back(&s.as);
        batch.labels.push_back(s.label);
    }
    batch.inputs = stack_batch(inputs);
    batch.as = stack_adjacency(mats);
    return batch;
}

} // namespace

RunMetrics train_branch(SpStGcnModel& model, const std::vector<TrainSample>& train_set,
                        const std::vector<TrainSample>& eval_set, Branch branch,
                        const TrainConfig& cfg, std::uint64_t seed) {
    if (train_set.empty()) throw Error("train_branch: empty training set");
    const auto start = std::chrono::steady_clock::now();

    RunMetrics metrics;
    OptimState optim;
    optim.momentum = cfg.momentum;
    optim.weight_decay = cfg.weight_decay;
    const std::vector<DiffTensor*> params = model.params();

    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 shuffle_rng(seed);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const double lr = cfg.schedule.lr(epoch);
        model.set_training(true);
        model.dropout_rng().seed(seed + 0x9e3779b9u * static_cast<std::uint64_t>(epoch));
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t begin = 0; begin < order.size();
             begin += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end =
                std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
            BatchView batch = make_batch(train_set, order, begin, end, branch);

            model.zero_grad();
            const Tensor logits = model.forward(batch.inputs, batch.as);
            const LossResult loss = cross_entropy_loss(logits, batch.labels);
            model.backward(loss.grad_logits);
            sgd_nesterov_step(params, optim, lr);

            loss_sum += loss.value * static_cast<double>(end - begin);
            const std::vector<int> pred = predict(logits);
            for (std::size_t i = 0; i < pred.size(); ++i) {
                if (pred[i] == batch.labels[i]) ++correct;
            }
        }
        const double train_loss = loss_sum / static_cast<double>(train_set.size());
        const double train_acc = static_cast<double>(correct) / static_cast<double>(train_set.size());
        metrics.records.push_back({epoch, to_string(branch), "train", train_loss, train_acc, lr});

        const bool stopping =
            (cfg.early_stop_train_acc > 0.0 && train_acc >= cfg.early_stop_train_acc) ||
            epoch == cfg.epochs;
        if (!eval_set.empty() && cfg.eval_every > 0 && (stopping || epoch % cfg.eval_every == 0)) {
            std::vector<int> labels;
            for (const TrainSample& s : eval_set) labels.push_back(s.label);
            const Tensor logits = eval_logits(model, eval_set, branch, cfg.batch_size);
            const LossResult loss = cross_entropy_loss(logits, labels);
            metrics.records.push_back({epoch, to_string(branch), "eval", loss.value,
                                       accuracy_from_logits(logits, labels), lr});
        }
        if (stopping) break;
    }

    // Re-estimate BN statistics under the final weights; the momentum-0.1
    // EMA lags them badly after a short run.
    model.set_training(true);
    model.begin_bn_refresh();
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(cfg.batch_size)) {
        const std::size_t end =
            std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
        const BatchView batch = make_batch(train_set, order, begin, end, branch);
        model.forward(batch.inputs, batch.as);
    }
    model.end_bn_refresh();

    model.set_training(false);
    metrics.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return metrics;
}

TrainResult train(const ModelConfig& cfg, const GraphSpec& graph,
                  const std::vector<TrainSample>& train_set,
                  const std::vector<TrainSample>& eval_set, const TrainConfig& tc,
                  std::uint64_t seed) {
    TrainResult result;
    std::vector<const Tensor*> fused_train, fused_eval;
    for (Branch br : {Branch::joint, Branch::velocity, Branch::bone}) {
        const std::uint64_t branch_seed = seed + static_cast<std::uint64_t>(br);
        BranchOutcome outcome;
        outcome.branch = br;
        SpStGcnModel model(cfg, graph, branch_seed);
        outcome.metrics = train_branch(model, train_set, eval_set, br, tc, branch_seed);
        outcome.checkpoint = checkpoint_from_model(model);
        outcome.train_logits = eval_logits(model, train_set, br, tc.batch_size);
        if (!eval_set.empty()) {
            outcome.eval_logits = eval_logits(model, eval_set, br, tc.batch_size);
        }
        result.branches.push_back(std::move(outcome));
    }
    for (const BranchOutcome& b : result.branches) fused_train.push_back(&b.train_logits);
    result.fused_train = fuse_scores(fused_train);
    if (!eval_set.empty()) {
        for (const BranchOutcome& b : result.branches) fused_eval.push_back(&b.eval_logits);
        result.fused_eval = fuse_scores(fused_eval);
    }
    return result;
}

Tensor eval_logits(SpStGcnModel& model, const std::vector<TrainSample>& samples, Branch branch,
                   int batch_size) {
    if (samples.empty()) throw Error("eval_logits: empty sample set");
    const bool was_training = model.training();
    model.set_training(false);

    std::vector<std::size_t> idx(samples.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;

    Tensor out({samples.size(), model.config().num_classes});
    for (std::size_t begin = 0; begin < samples.size();
         begin += static_cast<std::size_t>(batch_size)) {
        const std::size_t end =
            std::min(samples.size(), begin + static_cast<std::size_t>(batch_size));
        BatchView batch = make_batch(samples, idx, begin, end, branch);
        const Tensor logits = model.forward(batch.inputs, batch.as);
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t k = 0; k < out.dim(1); ++k) {
                out.at(i, k) = logits.at(i - begin, k);
            }
        }
    }
    model.set_training(was_training);
    return out;
}

double accuracy_from_logits(const Tensor& logits, const std::vector<int>& labels) {
    const std::vector<int> pred = predict(logits);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] == labels[i]) ++correct;
    }
    return pred.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(pred.size());
}

Tensor fuse_scores(const std::vector<const Tensor*>& branch_logits) {
    if (branch_logits.empty()) throw Error("fuse_scores: nothing to fuse");
    Tensor out = *branch_logits[0];
    for (std::size_t b = 1; b < branch_logits.size(); ++b) {
        if (!branch_logits[b]->same_shape(out)) {
            throw ShapeMismatch("fuse_scores: logit shapes differ");
        }
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += (*branch_logits[b])[i];
    }
    return out;
}

std::vector<int> predict(const Tensor& logits) {
    if (logits.rank() != 2) throw ShapeMismatch("predict: expected (N,K) logits");
    std::vector<int> out(logits.dim(0));
    for (std::size_t n = 0; n < logits.dim(0); ++n) {
        const double* row = logits.data() + n * logits.dim(1);
        std::size_t best = 0;
        for (std::size_t k = 1; k < logits.dim(1); ++k) {
            if (row[k] > row[best]) best = k; // ties keep the lowest index
        }
        out[n] = static_cast<int>(best);
    }
    return out;
}

void write_metrics(std::ostream& os, const RunMetrics& metrics) {
    os << "epoch\tbranch\tsplit\tloss\taccuracy\tlr\n";
    for (const EpochRecord& r : metrics.records) {
        os << r.epoch << "\t" << r.branch << "\t" << r.split << "\t" << r.loss << "\t"
           << r.accuracy << "\t" << r.lr << "\n";
    }
}

// ---------------------------------------------------------------------------
// Complexity accounting
// ---------------------------------------------------------------------------

double ComplexityReport::param_overhead() const {
    return params_spatial_only() == 0
               ? 0.0
               : static_cast<double>(params_structural) / static_cast<double>(params_spatial_only());
}

double ComplexityReport::macs_overhead() const {
    return macs_spatial_only() == 0
               ? 0.0
               : static_cast<double>(macs_structural) / static_cast<double>(macs_spatial_only());
}

ComplexityReport count_params_flops(const ModelConfig& cfg) {
    cfg.validate();
    ComplexityReport rep;
    const std::size_t v = cfg.joints;
    const std::size_t m = cfg.bodies;
    const std::size_t partitions = static_cast<std::size_t>(cfg.max_hop) + 1;

    std::size_t t = cfg.input_frames;
    for (std::size_t i = 0; i < cfg.stages.size(); ++i) {
        const StageSpec& st = cfg.stages[i];
        const std::string name = "stage" + std::to_string(i);
        const std::size_t t_out = TemporalConv::out_frames(t, cfg.temporal_kernel, st.stride);

        // spatial branch: per partition, W_j (C_out x C_in) applied per
        // (t,v,m) plus the V x V adjacency contraction; B_j parameters.
        LayerComplexity gcn{name + ".gcn", 0, 0};
        gcn.params += partitions * (st.c_out * st.c_in + v * v);
        gcn.macs += partitions * (st.c_out * st.c_in * t * v * m + st.c_out * v * v * t * m);

        if (cfg.structural) {
            const std::size_t spar = st.c_out * st.c_in; // M_1
            const std::size_t smacs = st.c_out * st.c_in * t * v * m + st.c_out * v * v * t * m;
            gcn.params += spar;
            gcn.macs += smacs;
            rep.params_structural += spar;
            rep.macs_structural += smacs;
        }
        rep.layers.push_back(gcn);

        LayerComplexity bn{name + ".bn", 2 * st.c_out, st.c_out * t * v * m};
        rep.layers.push_back(bn);

        LayerComplexity tc{name + ".tconv", st.c_out * st.c_out * cfg.temporal_kernel + st.c_out,
                           st.c_out * st.c_out * cfg.temporal_kernel * t_out * v * m};
        rep.layers.push_back(tc);

        if (st.c_in != st.c_out) {
            LayerComplexity proj{name + ".proj", st.c_out * st.c_in,
                                 st.c_out * st.c_in * t_out * v * m};
            rep.layers.push_back(proj);
        }
        t = t_out;
    }
    LayerComplexity fc{"fc", cfg.stages.back().c_out * cfg.num_classes + cfg.num_classes,
                       cfg.stages.back().c_out * cfg.num_classes};
    rep.layers.push_back(fc);

    for (const LayerComplexity& l : rep.layers) {
        rep.params_total += l.params;
        rep.macs_total += l.macs;
    }
    return rep;
}

void print_complexity(std::ostream& os, const ComplexityReport& rep, const ModelConfig& cfg) {
    os << "model: " << cfg.stages.size() << " stages, " << cfg.joints << " joints, T="
       << cfg.input_frames << ", M=" << cfg.bodies << "\n";
    os << "layer                    params        MACs\n";
    for (const LayerComplexity& l : rep.layers) {
        os << l.name;
        for (std::size_t pad = l.name.size(); pad < 22; ++pad) os << ' ';
        os << "  " << l.params << "\t" << l.macs << "\n";
    }
    os << "\n";
    os << "Sp-GCN   (spatial only): params " << rep.params_spatial_only() << ", forward MACs "
       << rep.macs_spatial_only() << "\n";
    os << "SpSt-GCN (both branches): params " << rep.params_total << ", forward MACs "
       << rep.macs_total << "\n";
    os << "structural branch overhead: params +" << 100.0 * rep.param_overhead() << "% (+"
       << rep.params_structural << "), MACs +" << 100.0 * rep.macs_overhead() << "% (+"
       << rep.macs_structural << ")\n";
    os << "reference full-scale architecture overhead: FLOPs +" << kReferenceFlopsOverheadPercent
       << "%, params +" << kReferenceParamsOverheadPercent
       << "% (different block internals; not asserted)\n";
}

} // namespace spstgcn
