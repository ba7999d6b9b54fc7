// spstgcn: command-line front end for the SpSt-GCN pipeline.
//
// Subcommands: synth, preprocess, adjacency, train, eval, gradcheck,
// complexity. Exit codes: 0 success, 1 internal failure, 2 user input error,
// 3 acceptance-check failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "spstgcn/cli_config.hpp"
#include "spstgcn/errors.hpp"
#include "spstgcn/preprocess.hpp"
#include "spstgcn/serialize.hpp"
#include "spstgcn/skeleton.hpp"
#include "spstgcn/struct_adj.hpp"
#include "spstgcn/synthetic.hpp"
#include "spstgcn/train.hpp"

namespace fs = std::filesystem;
using namespace spstgcn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;
constexpr int kExitCheckFailed = 3;

struct CommonOpts {
    std::uint64_t seed = 0;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    std::string config_path;
};

// Values from the config file fill any option the command line left alone.
class ConfigMerge {
public:
    explicit ConfigMerge(const CliConfig& cfg) : cfg_(cfg) {}

    template <typename T>
    void apply(const CLI::Option* opt, const std::string& key, T& var) const {
        if (opt != nullptr && opt->count() > 0) return; // flag wins
        if (!cfg_.has(key)) return;
        std::istringstream is(cfg_.get(key));
        T parsed;
        if (!(is >> parsed)) throw InvalidConfig("config key '" + key + "' has a bad value");
        var = parsed;
    }

    void apply_flag(const CLI::Option* opt, const std::string& key, bool& var) const {
        if (opt != nullptr && opt->count() > 0) return;
        if (!cfg_.has(key)) return;
        const std::string& v = cfg_.get(key);
        var = !(v == "0" || v == "false" || v == "off");
    }

private:
    const CliConfig& cfg_;
};

std::vector<MotionProgram> parse_class_list(const std::string& list) {
    std::vector<MotionProgram> out;
    std::istringstream is(list);
    std::string item;
    while (std::getline(is, item, ',')) {
        if (!item.empty()) out.push_back(motion_program_from_string(item));
    }
    return out;
}

fs::path resolve_entry_path(const fs::path& manifest, const std::string& entry) {
    fs::path p(entry);
    if (p.is_absolute()) return p;
    return manifest.parent_path() / p;
}

struct LoadedDataset {
    std::vector<FeatureTensor> raw;
    std::vector<int> labels;
    std::vector<std::string> ids;
};

LoadedDataset load_raw_dataset(const fs::path& manifest_path, std::size_t target_frames,
                               std::size_t bodies) {
    const DatasetManifest manifest = read_manifest(manifest_path);
    LoadedDataset out;
    for (const ManifestEntry& e : manifest.entries) {
        const fs::path p = resolve_entry_path(manifest_path, e.path);
        if (!fs::exists(p)) {
            throw IoError("manifest entry not found: " + p.string());
        }
        const SkeletonSequence seq = parse_ntu_skeleton_file(p);
        out.raw.push_back(to_tensor(seq, target_frames, bodies));
        out.labels.push_back(e.label);
        out.ids.push_back(p.stem().string());
    }
    return out;
}

ModelConfig plan_config(const std::string& plan, std::size_t classes, std::size_t frames,
                        std::size_t bodies, bool structural) {
    ModelConfig cfg;
    if (plan == "default") {
        cfg = ModelConfig::defaults(classes);
    } else if (plan == "desk") {
        cfg = ModelConfig::desk(classes);
    } else {
        throw InvalidConfig("unknown plan '" + plan + "' (expected: default, desk)");
    }
    cfg.input_frames = frames;
    cfg.bodies = bodies;
    cfg.structural = structural;
    return cfg;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

int cmd_synth(const CommonOpts& common, const std::string& out_dir, const std::string& classes,
              std::size_t samples_per_class, std::size_t eval_samples_per_class,
              std::size_t frames, std::size_t bodies) {
    SyntheticSpec spec;
    if (!classes.empty()) spec.classes = parse_class_list(classes);
    spec.frames = frames;
    spec.bodies = bodies;

    const fs::path root(out_dir);
    fs::create_directories(root / "train");
    fs::create_directories(root / "eval");

    auto emit = [&](const char* split, std::size_t per_class, std::uint64_t seed, int subject) {
        SyntheticSpec s = spec;
        s.samples_per_class = per_class;
        const SyntheticDataset data = generate_synthetic_dataset(s, seed);
        DatasetManifest manifest;
        manifest.split_rule = SplitRule::explicit_list;
        for (std::size_t i = 0; i < data.tensors.size(); ++i) {
            char name[64];
            std::snprintf(name, sizeof(name), "%s/sample_%04zu.skeleton", split, i);
            const fs::path file = root / name;
            std::ofstream os(file);
            if (!os) throw IoError("cannot write " + file.string());
            write_ntu_skeleton(os, tensor_to_sequence(data.tensors[i], name));
            manifest.entries.push_back({name, data.labels[i], subject, 0});
        }
        write_manifest(root / (std::string(split) + "_manifest.tsv"), manifest);
        return data.tensors.size();
    };

    const std::size_t n_train = emit("train", samples_per_class, common.seed, 0);
    const std::size_t n_eval = emit("eval", eval_samples_per_class, common.seed + 7777, 1);
    std::cout << "wrote " << n_train << " train and " << n_eval << " eval samples under "
              << root.string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// preprocess
// ---------------------------------------------------------------------------

int cmd_preprocess(const CommonOpts& common, const std::string& manifest_arg,
                   const std::string& out_dir, std::size_t target_frames, std::size_t bodies,
                   bool force) {
    (void)common;
    const fs::path manifest_path(manifest_arg);
    const DatasetManifest manifest = read_manifest(manifest_path);
    const GraphSpec graph = ntu_graph();
    const fs::path root(out_dir);
    fs::create_directories(root);

    std::size_t written = 0, skipped = 0;
    std::ofstream index(root / "index.tsv");
    if (!index) throw IoError("cannot write " + (root / "index.tsv").string());

    for (const ManifestEntry& e : manifest.entries) {
        const fs::path src = resolve_entry_path(manifest_path, e.path);
        if (!fs::exists(src)) throw IoError("manifest entry not found: " + src.string());
        const std::string id = src.stem().string();
        const fs::path joint_p = root / (id + ".joint.bin");
        const fs::path vel_p = root / (id + ".velocity.bin");
        const fs::path bone_p = root / (id + ".bone.bin");

        const bool fresh = fs::exists(joint_p) && fs::exists(vel_p) && fs::exists(bone_p) &&
                           fs::last_write_time(joint_p) >= fs::last_write_time(src);
        if (fresh && !force) {
            ++skipped;
        } else {
            try {
                const SkeletonSequence seq = parse_ntu_skeleton_file(src);
                const FeatureTensor raw = to_tensor(seq, target_frames, bodies);
                const BranchSet set = preprocess_all(raw, graph);
                save_feature_tensor(joint_p, set.joint);
                save_feature_tensor(vel_p, set.velocity);
                save_feature_tensor(bone_p, set.bone);
                ++written;
            } catch (...) {
                // no partial outputs
                fs::remove(joint_p);
                fs::remove(vel_p);
                fs::remove(bone_p);
                throw;
            }
        }
        index << id << "\t" << e.label << "\t" << joint_p.filename().string() << "\t"
              << vel_p.filename().string() << "\t" << bone_p.filename().string() << "\n";
    }
    std::cout << "preprocess: " << written << " written, " << skipped << " up to date\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// adjacency
// ---------------------------------------------------------------------------

int cmd_adjacency(const CommonOpts& common, const std::string& manifest_arg,
                  const std::string& out_file, int radius, bool no_normalize, bool per_branch,
                  std::size_t target_frames, std::size_t bodies) {
    const LoadedDataset data = load_raw_dataset(manifest_arg, target_frames, bodies);
    const GraphSpec graph = ntu_graph();
    StructAdjConfig cfg;
    cfg.radius = radius;
    cfg.normalize_by_path = !no_normalize;

    std::vector<std::pair<std::string, Tensor>> entries;
    std::vector<double> offdiag;

    auto add = [&](const std::string& id, const FeatureTensor& x) {
        const StructuralAdjacency as = structural_adjacency_for(x, graph, cfg);
        for (int a : graph.edge_nodes) {
            for (int b : graph.edge_nodes) {
                if (a != b) offdiag.push_back(as.as.at(a, b));
            }
        }
        entries.emplace_back(id, as.as);
    };

    if (per_branch) {
        for (std::size_t i = 0; i < data.raw.size(); ++i) {
            const BranchSet set = preprocess_all(data.raw[i], graph);
            add(data.ids[i] + ":joint", set.joint);
            add(data.ids[i] + ":velocity", set.velocity);
            add(data.ids[i] + ":bone", set.bone);
        }
    } else {
        std::vector<StructuralAdjacency> all =
            precompute_structural(data.raw, graph, cfg, common.jobs);
        for (std::size_t i = 0; i < all.size(); ++i) {
            entries.emplace_back(data.ids[i], all[i].as);
            for (int a : graph.edge_nodes) {
                for (int b : graph.edge_nodes) {
                    if (a != b) offdiag.push_back(all[i].as.at(a, b));
                }
            }
        }
    }
    save_adjacency_cache(out_file, entries);

    std::sort(offdiag.begin(), offdiag.end());
    const double min_v = offdiag.empty() ? 0.0 : offdiag.front();
    const double median = offdiag.empty() ? 0.0 : offdiag[offdiag.size() / 2];
    std::cout << "adjacency: " << entries.size() << " matrices -> " << out_file << "\n";
    std::cout << "off-diagonal min " << min_v << ", median " << median << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// train / eval
// ---------------------------------------------------------------------------

// Builds ready-to-train samples. When an adjacency cache is given, As comes
// from it (keyed by sample id) instead of being recomputed.
std::vector<TrainSample> build_samples(const LoadedDataset& data, const GraphSpec& graph,
                                       const StructAdjConfig& cfg, unsigned jobs,
                                       const std::string& adjacency_cache) {
    std::vector<TrainSample> samples;
    if (adjacency_cache.empty()) {
        samples = prepare_samples(data.raw, data.labels, graph, cfg, jobs);
    } else {
        std::map<std::string, Tensor> cached;
        for (auto& [id, mat] : load_adjacency_cache(adjacency_cache)) {
            cached.emplace(id, std::move(mat));
        }
        samples.resize(data.raw.size());
        for (std::size_t i = 0; i < data.raw.size(); ++i) {
            const auto it = cached.find(data.ids[i]);
            if (it == cached.end()) {
                throw MalformedFile("adjacency cache " + adjacency_cache +
                                    " has no entry for sample '" + data.ids[i] + "'");
            }
            samples[i].branches = preprocess_all(data.raw[i], graph);
            samples[i].as = it->second;
            samples[i].label = data.labels[i];
        }
    }
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i].id = data.ids[i];
    return samples;
}

int cmd_train(const CommonOpts& common, const std::string& train_manifest,
              const std::string& eval_manifest, const std::string& out_dir,
              const std::string& plan, int epochs, int batch_size, double base_lr,
              int warm_epochs, int total_epochs, double dropout, double early_stop,
              int eval_every, std::size_t target_frames, std::size_t bodies, int radius,
              bool no_structural, const std::string& adjacency_cache) {
    const GraphSpec graph = ntu_graph();
    const LoadedDataset train_data = load_raw_dataset(train_manifest, target_frames, bodies);
    LoadedDataset eval_data;
    if (!eval_manifest.empty()) {
        eval_data = load_raw_dataset(eval_manifest, target_frames, bodies);
    }
    int num_classes = 0;
    for (int label : train_data.labels) num_classes = std::max(num_classes, label + 1);
    for (int label : eval_data.labels) num_classes = std::max(num_classes, label + 1);

    StructAdjConfig adj_cfg;
    adj_cfg.radius = radius;
    const std::vector<TrainSample> train_samples =
        build_samples(train_data, graph, adj_cfg, common.jobs, adjacency_cache);
    const std::vector<TrainSample> eval_samples =
        eval_manifest.empty()
            ? std::vector<TrainSample>{}
            : build_samples(eval_data, graph, adj_cfg, common.jobs, adjacency_cache);

    ModelConfig cfg = plan_config(plan, static_cast<std::size_t>(num_classes), target_frames,
                                  bodies, !no_structural);
    cfg.dropout = dropout;
    TrainConfig tc;
    tc.epochs = epochs;
    tc.batch_size = batch_size;
    tc.schedule = {base_lr, warm_epochs, total_epochs > 0 ? total_epochs : epochs};
    tc.dropout = dropout;
    tc.early_stop_train_acc = early_stop;
    tc.eval_every = eval_every;

    const fs::path root(out_dir);
    fs::create_directories(root);
    std::ofstream metrics_os(root / "metrics.tsv");
    if (!metrics_os) throw IoError("cannot write " + (root / "metrics.tsv").string());

    std::vector<int> train_labels, eval_labels;
    for (const TrainSample& s : train_samples) train_labels.push_back(s.label);
    for (const TrainSample& s : eval_samples) eval_labels.push_back(s.label);

    const TrainResult result =
        train(cfg, graph, train_samples, eval_samples, tc, common.seed);
    for (const BranchOutcome& outcome : result.branches) {
        write_metrics(metrics_os, outcome.metrics);
        save_checkpoint(root / (to_string(outcome.branch) + ".ckpt"), outcome.checkpoint);
        std::cout << to_string(outcome.branch) << ": train acc "
                  << accuracy_from_logits(outcome.train_logits, train_labels);
        if (!eval_samples.empty()) {
            std::cout << ", eval acc " << accuracy_from_logits(outcome.eval_logits, eval_labels);
        }
        std::cout << " (" << outcome.metrics.wall_seconds << "s)\n";
    }
    std::cout << "fused: train acc " << accuracy_from_logits(result.fused_train, train_labels);
    if (!eval_samples.empty()) {
        std::cout << ", eval acc " << accuracy_from_logits(result.fused_eval, eval_labels);
    }
    std::cout << "\ncheckpoints and metrics.tsv written to " << root.string() << "\n";
    return kExitOk;
}

int cmd_eval(const CommonOpts& common, const std::string& manifest_arg,
             const std::string& ckpt_dir, int batch_size, std::size_t target_frames,
             std::size_t bodies, int radius, const std::string& adjacency_cache) {
    const GraphSpec graph = ntu_graph();
    const LoadedDataset data = load_raw_dataset(manifest_arg, target_frames, bodies);
    StructAdjConfig adj_cfg;
    adj_cfg.radius = radius;
    const std::vector<TrainSample> samples =
        build_samples(data, graph, adj_cfg, common.jobs, adjacency_cache);
    std::vector<int> labels;
    for (const TrainSample& s : samples) labels.push_back(s.label);

    const fs::path root(ckpt_dir);
    std::map<Branch, Tensor> logits;
    SpStGcnModel* smoothing_probe = nullptr;
    std::unique_ptr<SpStGcnModel> probe_holder;
    for (Branch br : {Branch::joint, Branch::velocity, Branch::bone}) {
        const Checkpoint ckpt = load_checkpoint(root / (to_string(br) + ".ckpt"));
        const ModelConfig cfg = model_config_from_text(ckpt.config_text);
        auto model = std::make_unique<SpStGcnModel>(cfg, graph, common.seed);
        load_into_model(*model, ckpt);
        logits.emplace(br, eval_logits(*model, samples, br, batch_size));
        std::cout << to_string(br) << " acc: "
                  << accuracy_from_logits(logits.at(br), labels) << "\n";
        if (br == Branch::joint) {
            probe_holder = std::move(model);
            smoothing_probe = probe_holder.get();
        }
    }

    // subset-fusion grid in the ablation-table layout
    const Tensor& j = logits.at(Branch::joint);
    const Tensor& v = logits.at(Branch::velocity);
    const Tensor& b = logits.at(Branch::bone);
    const std::vector<std::pair<std::string, std::vector<const Tensor*>>> grid = {
        {"joint+velocity", {&j, &v}},
        {"joint+bone", {&j, &b}},
        {"velocity+bone", {&v, &b}},
        {"joint+velocity+bone", {&j, &v, &b}},
    };
    for (const auto& [name, parts] : grid) {
        std::cout << name << " acc: " << accuracy_from_logits(fuse_scores(parts), labels) << "\n";
    }

    // over-smoothing diagnostic on a small probe batch (report only)
    if (smoothing_probe != nullptr && !samples.empty()) {
        const std::size_t probe_n = std::min<std::size_t>(samples.size(), 16);
        std::vector<const Tensor*> inputs, mats;
        for (std::size_t i = 0; i < probe_n; ++i) {
            inputs.push_back(&branch_of(samples[i], Branch::joint).data);
            mats.push_back(&samples[i].as);
        }
        const Tensor x = stack_batch(inputs);
        const Tensor as = stack_adjacency(mats);
        const double with = smoothing_probe->edge_node_smoothing(x, as, graph.edge_nodes);
        smoothing_probe->set_structural_enabled(false);
        const double without = smoothing_probe->edge_node_smoothing(x, as, graph.edge_nodes);
        smoothing_probe->set_structural_enabled(true);
        std::cout << "edge-node cosine similarity after final block (joint branch): "
                  << "spst " << with << " vs spatial-only " << without << "\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// gradcheck / complexity
// ---------------------------------------------------------------------------

int cmd_gradcheck(const CommonOpts& common, double step, int seeds) {
    bool ok = true;
    std::cout << "check                       seeds   worst rel err   tolerance\n";
    const auto run = [&](const char* name, GradCheckReport (*fn)(std::uint64_t, double),
                         double tol) {
        double worst = 0.0;
        for (int s = 0; s < seeds; ++s) {
            const GradCheckReport rep = fn(common.seed + static_cast<std::uint64_t>(s), step);
            worst = std::max(worst, rep.worst);
        }
        const bool pass = worst <= tol;
        ok = ok && pass;
        std::printf("%-26s  %-5d   %-13.3e   %.0e %s\n", name, seeds, worst, tol,
                    pass ? "ok" : "FAIL");
    };
    run("spst-gcn layer", grad_check_spst_layer, 1e-6);
    run("temporal conv", grad_check_temporal_conv, 1e-6);
    run("gcn block", grad_check_block, 1e-6);
    run("one-block model", grad_check_model, 1e-5);
    run("cross-entropy loss", grad_check_loss, 1e-8);
    return ok ? kExitOk : kExitCheckFailed;
}

int cmd_complexity(const std::string& plan, std::size_t classes, std::size_t frames,
                   std::size_t bodies, bool no_structural) {
    const ModelConfig cfg = plan_config(plan, classes, frames, bodies, !no_structural);
    const ComplexityReport rep = count_params_flops(cfg);
    print_complexity(std::cout, rep, cfg);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SpSt-GCN: spatial-structural graph convolution pipeline"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Expand all subcommand help");
    // global options (--seed, --jobs, --config) are accepted after the
    // subcommand name as well
    app.fallthrough();

    CommonOpts common;

    // config file: --config beats SPST_CONFIG
    std::string config_path;
    if (const char* env = std::getenv("SPST_CONFIG")) config_path = env;
    app.add_option("--config", config_path, "Flat key = value config file");

    app.add_option("--seed", common.seed, "RNG seed (every subcommand honors it)");
    app.add_option("--jobs", common.jobs, "Worker threads for parallel passes");

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic skeleton dataset");
    std::string synth_out = "synth_data";
    std::string synth_classes;
    std::size_t samples_per_class = 40, eval_samples_per_class = 20, frames = 64, bodies = 1;
    synth->add_option("--out", synth_out, "Output directory");
    auto* opt_classes = synth->add_option(
        "--classes", synth_classes,
        "Comma list: hands_converge,hands_independent,hands_sync,foot_oscillate");
    auto* opt_spc = synth->add_option("--samples-per-class", samples_per_class, "Train samples");
    auto* opt_espc =
        synth->add_option("--eval-samples-per-class", eval_samples_per_class, "Eval samples");
    auto* opt_frames = synth->add_option("--target-frames", frames, "Frames per sample");
    auto* opt_bodies = synth->add_option("--bodies", bodies, "Body slots");

    // preprocess
    auto* preprocess = app.add_subcommand("preprocess", "Compute and cache the three branches");
    std::string pre_manifest, pre_out = "branch_cache";
    bool pre_force = false;
    preprocess->add_option("--manifest", pre_manifest, "Dataset manifest")->required();
    preprocess->add_option("--out", pre_out, "Cache directory");
    auto* opt_pre_frames = preprocess->add_option("--target-frames", frames, "Frames per sample");
    auto* opt_pre_bodies = preprocess->add_option("--bodies", bodies, "Body slots");
    preprocess->add_flag("--force", pre_force, "Recompute even when up to date");

    // adjacency
    auto* adjacency = app.add_subcommand("adjacency", "Precompute structural adjacency matrices");
    std::string adj_manifest, adj_out = "as_cache.bin";
    int radius = 1;
    bool no_normalize = false, per_branch = false;
    adjacency->add_option("--manifest", adj_manifest, "Dataset manifest")->required();
    adjacency->add_option("--out", adj_out, "Cache file");
    auto* opt_radius = adjacency->add_option("--radius", radius, "FastDTW radius");
    adjacency->add_flag("--no-normalize", no_normalize, "Skip warp-path length normalization");
    adjacency->add_flag("--per-branch", per_branch, "One matrix per sample-branch");
    auto* opt_adj_frames = adjacency->add_option("--target-frames", frames, "Frames per sample");
    auto* opt_adj_bodies = adjacency->add_option("--bodies", bodies, "Body slots");

    // train
    auto* train = app.add_subcommand("train", "Train the three branch models");
    std::string train_manifest, eval_manifest, train_out = "run";
    std::string plan = "desk";
    int epochs = 30, batch_size = 16, warm_epochs = 3, total_epochs = 0, eval_every = 0;
    double base_lr = 0.05, dropout = 0.25, early_stop = 0.995;
    int train_radius = 1;
    bool no_structural = false;
    train->add_option("--train-manifest", train_manifest, "Training manifest")->required();
    train->add_option("--eval-manifest", eval_manifest, "Evaluation manifest");
    train->add_option("--out", train_out, "Output directory");
    auto* opt_plan = train->add_option("--plan", plan, "Channel plan: default | desk");
    auto* opt_epochs = train->add_option("--epochs", epochs, "Max epochs");
    auto* opt_batch = train->add_option("--batch-size", batch_size, "Batch size");
    auto* opt_lr = train->add_option("--base-lr", base_lr, "Base learning rate");
    auto* opt_warm = train->add_option("--warm-epochs", warm_epochs, "Warm epochs");
    auto* opt_total = train->add_option("--total-epochs", total_epochs,
                                        "Cosine horizon (defaults to --epochs)");
    auto* opt_dropout = train->add_option("--dropout", dropout, "Dropout probability");
    train->add_option("--early-stop", early_stop,
                      "Stop at this training accuracy (<=0 disables)");
    train->add_option("--eval-every", eval_every, "Eval every k epochs (0 = end only)");
    auto* opt_train_frames = train->add_option("--target-frames", frames, "Frames per sample");
    auto* opt_train_bodies = train->add_option("--bodies", bodies, "Body slots");
    auto* opt_train_radius = train->add_option("--radius", train_radius, "FastDTW radius");
    auto* opt_train_nostruct =
        train->add_flag("--no-structural", no_structural, "Spatial-only Sp-GCN ablation");
    std::string adjacency_cache;
    train->add_option("--adjacency-cache", adjacency_cache,
                      "Reuse matrices from an `adjacency` run instead of recomputing");

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate checkpoints with subset fusion");
    std::string eval_manifest2, eval_ckpts = "run";
    eval->add_option("--manifest", eval_manifest2, "Evaluation manifest")->required();
    eval->add_option("--checkpoints", eval_ckpts, "Directory with joint/velocity/bone .ckpt");
    auto* opt_eval_batch = eval->add_option("--batch-size", batch_size, "Batch size");
    auto* opt_eval_frames = eval->add_option("--target-frames", frames, "Frames per sample");
    auto* opt_eval_bodies = eval->add_option("--bodies", bodies, "Body slots");
    auto* opt_eval_radius = eval->add_option("--radius", train_radius, "FastDTW radius");
    eval->add_option("--adjacency-cache", adjacency_cache,
                     "Reuse matrices from an `adjacency` run instead of recomputing");

    // gradcheck
    auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient verification");
    double fd_step = 1e-5;
    int fd_seeds = 3;
    gradcheck->add_option("--step", fd_step, "Central difference step");
    gradcheck->add_option("--seeds", fd_seeds, "Random instances per check");

    // complexity
    auto* complexity = app.add_subcommand("complexity", "Parameter and FLOP accounting");
    std::string cplan = "default";
    std::size_t cclasses = 60;
    bool cno_structural = false;
    auto* opt_cplan = complexity->add_option("--plan", cplan, "Channel plan: default | desk");
    complexity->add_option("--classes", cclasses, "Class count");
    auto* opt_cframes = complexity->add_option("--target-frames", frames, "Frames per sample");
    auto* opt_cbodies = complexity->add_option("--bodies", bodies, "Body slots");
    complexity->add_flag("--no-structural", cno_structural, "Spatial-only Sp-GCN");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp") {
            return app.exit(e);
        }
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        CliConfig file_cfg;
        if (!config_path.empty()) {
            file_cfg = CliConfig::from_file(config_path, known_config_keys());
        }
        const ConfigMerge merge(file_cfg);
        merge.apply(app.get_option("--seed"), "seed", common.seed);
        merge.apply(app.get_option("--jobs"), "jobs", common.jobs);
        merge.apply(opt_radius, "radius", radius);
        merge.apply(opt_train_radius, "radius", train_radius);
        merge.apply(opt_eval_radius, "radius", train_radius);
        merge.apply(opt_epochs, "epochs", epochs);
        merge.apply(opt_batch, "batch-size", batch_size);
        merge.apply(opt_eval_batch, "batch-size", batch_size);
        merge.apply(opt_lr, "base-lr", base_lr);
        merge.apply(opt_warm, "warm-epochs", warm_epochs);
        merge.apply(opt_total, "total-epochs", total_epochs);
        merge.apply(opt_dropout, "dropout", dropout);
        merge.apply(opt_spc, "samples-per-class", samples_per_class);
        merge.apply(opt_espc, "eval-samples-per-class", eval_samples_per_class);
        merge.apply(opt_classes, "classes", synth_classes);
        merge.apply(opt_plan, "plan", plan);
        merge.apply(opt_cplan, "plan", cplan);
        for (CLI::Option* opt : {opt_frames, opt_pre_frames, opt_adj_frames, opt_train_frames,
                                 opt_eval_frames, opt_cframes}) {
            merge.apply(opt, "target-frames", frames);
        }
        for (CLI::Option* opt : {opt_bodies, opt_pre_bodies, opt_adj_bodies, opt_train_bodies,
                                 opt_eval_bodies, opt_cbodies}) {
            merge.apply(opt, "bodies", bodies);
        }
        bool cfg_structural_off = false;
        merge.apply_flag(opt_train_nostruct, "structural", cfg_structural_off);

        if (synth->parsed()) {
            return cmd_synth(common, synth_out, synth_classes, samples_per_class,
                             eval_samples_per_class, frames, bodies);
        }
        if (preprocess->parsed()) {
            return cmd_preprocess(common, pre_manifest, pre_out, frames, bodies, pre_force);
        }
        if (adjacency->parsed()) {
            return cmd_adjacency(common, adj_manifest, adj_out, radius, no_normalize, per_branch,
                                 frames, bodies);
        }
        if (train->parsed()) {
            return cmd_train(common, train_manifest, eval_manifest, train_out, plan, epochs,
                             batch_size, base_lr, warm_epochs, total_epochs, dropout, early_stop,
                             eval_every, frames, bodies, train_radius, no_structural,
                             adjacency_cache);
        }
        if (eval->parsed()) {
            return cmd_eval(common, eval_manifest2, eval_ckpts, batch_size, frames, bodies,
                            train_radius, adjacency_cache);
        }
        if (gradcheck->parsed()) {
            return cmd_gradcheck(common, fd_step, fd_seeds);
        }
        if (complexity->parsed()) {
            return cmd_complexity(cplan, cclasses, frames, bodies, cno_structural);
        }
        std::cerr << "error: no subcommand\n";
        return kExitUsage;
    } catch (const InvalidConfig& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const MalformedFile& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const LabelOutOfRange& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}
