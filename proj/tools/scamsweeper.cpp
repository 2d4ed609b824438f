// ScamSweeper command-line surface: synth, ingest, sample, train, eval,
// ablate. One key-value config file feeds every subcommand; flags win.
// Exit codes: 0 ok, 2 missing file, 3 invalid config, 4 bad input data.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ssw/encoder.hpp"
#include "ssw/errors.hpp"
#include "ssw/features.hpp"
#include "ssw/hash.hpp"
#include "ssw/rng.hpp"
#include "ssw/strwalk.hpp"
#include "ssw/synthgen.hpp"
#include "ssw/trainer.hpp"
#include "ssw/txgraph.hpp"

namespace fs = std::filesystem;
using namespace ssw;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct CommonOpts {
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    std::string out;
};

struct WalkOpts {
    std::size_t structural_window = 10;
    std::uint64_t interval_width = 86'400;
    std::size_t walks_per_node = 1;
    std::size_t max_walk_len = 20;
    std::size_t max_intervals = 16;
    double tau = 0.0;
    std::string direction = "out";
    std::size_t max_per_class = 0;  // 0: every labeled account walks
};

struct ModelOpts {
    std::size_t d_h = 32;
    std::size_t heads = 4;
    std::size_t n_max = 0;  // 0: structural_window
    std::size_t d_model = 32;
    std::size_t blocks = 2;
    std::size_t m_max = 0;  // 0: max_intervals
};

struct TrainOpts {
    double lr = 1e-3;
    std::size_t max_epochs = 200;
    std::size_t patience = 10;
    std::size_t batch_size = 16;
    double train_frac = 0.8;
    std::string class_weights = "inverse";
    std::string ablation = "none";
};

void add_common(CLI::App* cmd, CommonOpts& o, const char* out_help) {
    cmd->add_option("--seed", o.seed, "Seed controlling all randomness");
    cmd->add_option("--threads", o.threads, "Worker count cap")->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out, out_help)->required();
}

void add_walk(CLI::App* cmd, WalkOpts& o) {
    cmd->add_option("--structural-window", o.structural_window,
                    "Neighbors sampled per structural step")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--interval-width", o.interval_width, "Temporal bin width in seconds")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--walks-per-node", o.walks_per_node, "Walks started per account")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-walk-len", o.max_walk_len, "Temporal steps per walk")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-intervals", o.max_intervals, "Cap on temporal bins per sequence")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--tau", o.tau, "Temporal softmax scale; <= 0 uses the graph mean gap");
    cmd->add_option("--direction", o.direction, "Walk edge direction")
        ->check(CLI::IsMember({"out", "both"}));
    cmd->add_option("--max-per-class", o.max_per_class,
                    "Cap on start accounts per label class (0 = all)");
}

void add_model(CLI::App* cmd, ModelOpts& o) {
    cmd->add_option("--d-h", o.d_h, "Subgraph embedding width")->check(CLI::PositiveNumber);
    cmd->add_option("--heads", o.heads, "Attention heads in the graph layer")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--n-max", o.n_max, "Aligned neighbor rows (0 = structural window)");
    cmd->add_option("--d-model", o.d_model, "Transformer model width")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--blocks", o.blocks, "Transformer blocks")->check(CLI::PositiveNumber);
    cmd->add_option("--m-max", o.m_max, "Padded sequence length (0 = max intervals)");
}

void add_train(CLI::App* cmd, TrainOpts& o) {
    cmd->add_option("--lr", o.lr, "Adam learning rate");
    cmd->add_option("--max-epochs", o.max_epochs, "Epoch cap")->check(CLI::PositiveNumber);
    cmd->add_option("--patience", o.patience, "Early-stopping patience in epochs");
    cmd->add_option("--batch-size", o.batch_size, "Items per optimizer step (0 = full batch)");
    cmd->add_option("--train-frac", o.train_frac, "Account fraction assigned to training");
    cmd->add_option("--class-weights", o.class_weights, "Loss weighting scheme")
        ->check(CLI::IsMember({"inverse", "uniform"}));
    cmd->add_option("--ablation", o.ablation, "Model variant")
        ->check(CLI::IsMember({"none", "no_graph_layer", "conventional_transformer"}));
}

walk::WalkConfig walk_config(const WalkOpts& w, std::uint64_t seed) {
    walk::WalkConfig cfg;
    cfg.max_walk_len = w.max_walk_len;
    cfg.structural_window = w.structural_window;
    cfg.interval_width = w.interval_width;
    cfg.tau = w.tau;
    cfg.max_intervals = w.max_intervals;
    cfg.seed = seed;
    cfg.direction = w.direction == "both" ? tx::Direction::both : tx::Direction::out;
    return cfg;
}

train::PipelineConfig pipeline_config(const ModelOpts& m, const WalkOpts& w,
                                      std::uint64_t seed) {
    train::PipelineConfig pc;
    pc.encoder.d_in = feat::kInputCols;
    pc.encoder.d_h = m.d_h;
    pc.encoder.heads = m.heads;
    pc.encoder.n_max = m.n_max ? m.n_max : w.structural_window;
    pc.encoder.seed = mix64(seed, 1);
    pc.model.d_phi = m.d_h;
    pc.model.d_model = m.d_model;
    pc.model.blocks = m.blocks;
    pc.model.m_max = m.m_max ? m.m_max : w.max_intervals;
    pc.model.n_classes = 3;
    pc.model.seed = mix64(seed, 2);
    return pc;
}

train::TrainConfig train_config(const TrainOpts& t, const train::Dataset& ds,
                                std::uint64_t seed) {
    train::TrainConfig tc;
    tc.lr = t.lr;
    tc.max_epochs = t.max_epochs;
    tc.patience = t.patience;
    tc.batch_size = t.batch_size;
    tc.train_frac = t.train_frac;
    tc.seed = seed;
    if (t.class_weights == "inverse") tc.class_weights = train::inverse_frequency_weights(ds);
    if (t.ablation == "no_graph_layer") tc.ablation = train::Ablation::no_graph_layer;
    if (t.ablation == "conventional_transformer")
        tc.ablation = train::Ablation::conventional_transformer;
    return tc;
}

void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError("cannot open " + path + " for writing");
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw FileError("write failed for " + path);
}

// Stable identity of a run: everything except wall-clock time.
struct Manifest {
    json doc;
    std::string hash;
};

Manifest make_manifest(const std::string& command, const json& resolved,
                       const std::vector<std::string>& inputs,
                       const std::vector<std::string>& outputs, std::uint64_t seed) {
    json identity = {{"command", command},
                     {"config_hash", hex_u64(fnv1a(resolved.dump()))},
                     {"inputs", inputs},
                     {"outputs", outputs},
                     {"seed", hex_u64(seed)},
                     {"version", kVersion}};
    Manifest m;
    m.hash = hex_u64(fnv1a(identity.dump()));
    m.doc = identity;
    m.doc["manifest_hash"] = m.hash;
    m.doc["resolved_config"] = resolved;
    m.doc["created_unix"] = static_cast<std::uint64_t>(std::time(nullptr));
    return m;
}

void write_manifest(const std::string& path, const Manifest& m) {
    write_text(path, m.doc.dump(2) + "\n");
}

void require_file(const std::string& path, const char* what) {
    if (!fs::exists(path)) throw FileError(std::string(what) + " not found: " + path);
}

tx::FileFormat parse_format(const std::string& s) {
    return s == "jsonl" ? tx::FileFormat::jsonl : tx::FileFormat::csv;
}

// Labeled start accounts, optionally capped per class by a seeded shuffle.
std::vector<std::uint32_t> pick_starts(const tx::TemporalMultigraph& g, std::size_t max_per_class,
                                       std::uint64_t seed) {
    std::vector<std::vector<std::uint32_t>> by_class(3);
    for (std::uint32_t id = 0; id < g.num_accounts(); ++id) {
        const tx::Label l = g.account(id).label;
        if (l != tx::Label::unknown) by_class[static_cast<std::size_t>(l)].push_back(id);
    }
    std::vector<std::uint32_t> starts;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& ids = by_class[c];
        if (max_per_class > 0 && ids.size() > max_per_class) {
            Rng rng(mix64(seed, c));
            for (std::size_t i = ids.size(); i > 1; --i)
                std::swap(ids[i - 1], ids[rng.below(i)]);
            ids.resize(max_per_class);
            std::sort(ids.begin(), ids.end());
        }
        starts.insert(starts.end(), ids.begin(), ids.end());
    }
    std::sort(starts.begin(), starts.end());
    return starts;
}

std::vector<walk::SubgraphSequence> load_walks_checked(const std::string& path,
                                                       const walk::WalkConfig& cfg) {
    require_file(path, "walk cache");
    auto seqs = walk::load_walk_cache(path, cfg);
    if (!seqs)
        throw ConfigError("walk cache " + path +
                          " was built with different sampling parameters; re-run sample");
    return std::move(*seqs);
}

json label_histogram(const tx::TemporalMultigraph& g) {
    std::size_t counts[4] = {0, 0, 0, 0};
    for (const tx::Account& a : g.accounts()) ++counts[static_cast<int>(a.label)];
    return {{"normal", counts[0]},
            {"phishing", counts[1]},
            {"scam", counts[2]},
            {"unknown", counts[3]}};
}

int run_synth(const CommonOpts& common, const synth::SynthConfig& cfg_in,
              const std::string& format) {
    synth::SynthConfig cfg = cfg_in;
    cfg.seed = common.seed;
    const synth::SynthResult res = synth::generate(cfg);

    fs::create_directories(common.out);
    const std::string ext = format == "jsonl" ? "jsonl" : "csv";
    const std::string tx_path = common.out + "/transactions." + ext;
    const std::string labels_path = common.out + "/labels.csv";
    const std::string motifs_path = common.out + "/motifs.jsonl";
    synth::export_graph(res.graph, tx_path, parse_format(format), labels_path);
    synth::write_motif_log(motifs_path, res.graph, res.motifs);

    const json resolved = {{"n_accounts", cfg.n_accounts},
                           {"attachment_m", cfg.attachment_m},
                           {"duration_days", cfg.duration_days},
                           {"phishing_count", cfg.phishing_count},
                           {"scam_count", cfg.scam_count},
                           {"value_mu", cfg.value_mu},
                           {"value_sigma", cfg.value_sigma},
                           {"edge_activity", cfg.edge_activity},
                           {"format", format}};
    const Manifest m = make_manifest("synth", resolved, {},
                                     {tx_path, labels_path, motifs_path}, common.seed);
    write_manifest(common.out + "/manifest.json", m);

    std::cout << "generated " << res.graph.num_accounts() << " accounts, "
              << res.graph.num_edges() << " transactions\n"
              << "labels: " << label_histogram(res.graph).dump() << "\n"
              << "content hash: " << hex_u64(synth::content_hash(res.graph)) << "\n"
              << "manifest: " << m.hash << "\n";
    return 0;
}

int run_ingest(const CommonOpts& common, const std::string& tx_path,
               const std::string& labels_path, const std::string& format,
               bool allow_self_loops) {
    require_file(tx_path, "transactions file");
    if (!labels_path.empty()) require_file(labels_path, "labels file");
    tx::IngestOptions opts;
    opts.allow_self_loops = allow_self_loops;
    const tx::IngestResult res = tx::ingest(tx_path, parse_format(format), labels_path, opts);
    tx::save_graph(res.graph, common.out);

    std::vector<std::string> inputs = {tx_path};
    if (!labels_path.empty()) inputs.push_back(labels_path);
    const json resolved = {{"format", format}, {"allow_self_loops", allow_self_loops}};
    const Manifest m = make_manifest("ingest", resolved, inputs, {common.out}, common.seed);
    write_manifest(common.out + ".manifest.json", m);

    std::cout << "ingested " << res.summary.nodes << " accounts, " << res.summary.edges
              << " transactions (" << res.summary.dropped_self_loops << " self-loops dropped)\n"
              << "labels: " << label_histogram(res.graph).dump() << "\n"
              << "manifest: " << m.hash << "\n";
    return 0;
}

json walk_resolved(const WalkOpts& w) {
    return {{"structural_window", w.structural_window},
            {"interval_width", w.interval_width},
            {"walks_per_node", w.walks_per_node},
            {"max_walk_len", w.max_walk_len},
            {"max_intervals", w.max_intervals},
            {"tau", w.tau},
            {"direction", w.direction},
            {"max_per_class", w.max_per_class}};
}

int run_sample(const CommonOpts& common, const std::string& graph_path, const WalkOpts& w) {
    require_file(graph_path, "graph");
    const tx::TemporalMultigraph g = tx::load_graph(graph_path);
    const walk::WalkConfig cfg = walk_config(w, common.seed);
    const std::vector<std::uint32_t> starts = pick_starts(g, w.max_per_class, common.seed);
    if (starts.empty()) throw DataError("graph has no labeled accounts to walk from");

    const std::vector<walk::SubgraphSequence> seqs =
        walk::sample_dataset(g, starts, cfg, w.walks_per_node);
    walk::save_walk_cache(common.out, cfg, seqs);

    const Manifest m =
        make_manifest("sample", walk_resolved(w), {graph_path}, {common.out}, common.seed);
    write_manifest(common.out + ".manifest.json", m);

    std::cout << "sampled " << seqs.size() << " walks from " << starts.size() << " accounts\n"
              << "walk config: " << walk::config_hash(cfg) << "\n"
              << "manifest: " << m.hash << "\n";
    return 0;
}

struct LoadedInputs {
    tx::TemporalMultigraph graph;
    train::Dataset dataset;
};

LoadedInputs load_inputs(const std::string& graph_path, const std::string& walks_path,
                         const WalkOpts& w, std::uint64_t seed) {
    require_file(graph_path, "graph");
    LoadedInputs in;
    in.graph = tx::load_graph(graph_path);
    const auto seqs = load_walks_checked(walks_path, walk_config(w, seed));
    in.dataset = train::build_dataset(in.graph, seqs);
    if (in.dataset.items.empty()) throw DataError("walk cache holds no labeled sequences");
    return in;
}

int run_train(const CommonOpts& common, const std::string& graph_path,
              const std::string& walks_path, const WalkOpts& w, const ModelOpts& mo,
              const TrainOpts& to) {
    const LoadedInputs in = load_inputs(graph_path, walks_path, w, common.seed);
    const train::PipelineConfig pc = pipeline_config(mo, w, common.seed);
    const train::TrainConfig tc = train_config(to, in.dataset, common.seed);
    const train::TrainResult r = train::train(in.dataset, pc, tc);

    fs::create_directories(common.out);
    const std::string ckpt_path = common.out + "/checkpoint.sswc";
    const std::string metrics_path = common.out + "/metrics.json";
    json resolved = walk_resolved(w);
    resolved["pipeline"] = train::config_json(pc, tc);
    const Manifest m = make_manifest("train", resolved, {graph_path, walks_path},
                                     {ckpt_path, metrics_path}, common.seed);

    train::save_pipeline(ckpt_path, r.pipeline);
    json metrics = r.metrics.to_json();
    metrics["manifest_hash"] = m.hash;
    metrics["loss_curve"] = r.loss_curve;
    metrics["best_epoch"] = r.best_epoch;
    write_text(metrics_path, metrics.dump(2) + "\n");
    write_manifest(common.out + "/manifest.json", m);

    std::cout << r.metrics.table() << "held-out items: " << r.split.test.size()
              << ", best epoch " << r.best_epoch << "\n"
              << "manifest: " << m.hash << "\n";
    return 0;
}

int run_eval(const CommonOpts& common, const std::string& graph_path,
             const std::string& walks_path, const std::string& ckpt_path, const WalkOpts& w,
             const ModelOpts& mo, const std::vector<CLI::Option*>& given_dims,
             const TrainOpts& to, const std::string& split) {
    require_file(ckpt_path, "checkpoint");
    const train::LoadedPipeline loaded = train::load_pipeline(ckpt_path);

    // dims given on the command line must agree with the checkpoint
    const ModelOpts ck{loaded.config.encoder.d_h, loaded.config.encoder.heads,
                       loaded.config.encoder.n_max, loaded.config.model.d_model,
                       loaded.config.model.blocks, loaded.config.model.m_max};
    const std::size_t want[] = {ck.d_h, ck.heads, ck.n_max, ck.d_model, ck.blocks, ck.m_max};
    const std::size_t got[] = {mo.d_h, mo.heads, mo.n_max, mo.d_model, mo.blocks, mo.m_max};
    for (std::size_t i = 0; i < given_dims.size(); ++i)
        if (given_dims[i]->count() > 0 && got[i] != want[i])
            throw ConfigError("checkpoint " + ckpt_path + " was trained with " +
                              given_dims[i]->get_name() + "=" + std::to_string(want[i]) +
                              ", not " + std::to_string(got[i]));

    const LoadedInputs in = load_inputs(graph_path, walks_path, w, common.seed);
    std::vector<std::size_t> idx;
    if (split == "full") {
        idx.resize(in.dataset.items.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    } else {
        const train::Split s = train::stratified_split(in.dataset, to.train_frac, common.seed);
        idx = split == "train" ? s.train : s.test;
    }
    train::MetricsReport metrics = train::evaluate(loaded.pipeline, in.dataset, idx);

    train::TrainConfig tc = train_config(to, in.dataset, common.seed);
    metrics.config_hash = train::config_hash(loaded.config, tc);
    metrics.dataset_hash = hex_u64(in.dataset.content_hash());
    metrics.seed = common.seed;

    json resolved = walk_resolved(w);
    resolved["split"] = split;
    resolved["pipeline"] = train::config_json(loaded.config, tc);
    const Manifest m = make_manifest("eval", resolved, {graph_path, walks_path, ckpt_path},
                                     {common.out}, common.seed);
    json doc = metrics.to_json();
    doc["manifest_hash"] = m.hash;
    doc["split"] = split;
    write_text(common.out, doc.dump(2) + "\n");
    write_manifest(common.out + ".manifest.json", m);

    std::cout << metrics.table() << "evaluated " << idx.size() << " items (" << split
              << " split)\n"
              << "manifest: " << m.hash << "\n";
    return 0;
}

int run_ablate(const CommonOpts& common, const std::string& graph_path,
               const std::string& walks_path, const WalkOpts& w, const ModelOpts& mo,
               const TrainOpts& to) {
    const LoadedInputs in = load_inputs(graph_path, walks_path, w, common.seed);
    const train::PipelineConfig pc = pipeline_config(mo, w, common.seed);
    const train::TrainConfig tc = train_config(to, in.dataset, common.seed);
    const train::AblationReport rep = train::run_ablation(in.dataset, pc, tc);

    fs::create_directories(common.out);
    json resolved = walk_resolved(w);
    resolved["pipeline"] = train::config_json(pc, tc);
    const std::string report_path = common.out + "/ablation.json";
    const Manifest m = make_manifest("ablate", resolved, {graph_path, walks_path},
                                     {report_path}, common.seed);
    json doc = rep.to_json();
    doc["manifest_hash"] = m.hash;
    write_text(report_path, doc.dump(2) + "\n");
    write_manifest(common.out + "/manifest.json", m);

    std::cout << rep.table() << "manifest: " << m.hash << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ScamSweeper: temporal-graph scam account detection"};
    app.set_version_flag("--version", kVersion);
    app.set_config("--config", "", "Key-value config file; command-line flags win");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);

    CommonOpts synth_common, ingest_common, sample_common, train_common, eval_common,
        ablate_common;
    synth::SynthConfig synth_cfg;
    std::string synth_format = "csv";
    std::string tx_path, labels_path, ingest_format = "csv";
    bool allow_self_loops = false;
    std::string graph_path, walks_path, ckpt_path, eval_split = "test";
    WalkOpts walk_opts;
    ModelOpts model_opts;
    TrainOpts train_opts;

    CLI::App* synth = app.add_subcommand("synth", "Generate a labeled synthetic network")->configurable();
    add_common(synth, synth_common, "Output directory");
    synth->add_option("--accounts", synth_cfg.n_accounts, "Total accounts")
        ->check(CLI::PositiveNumber);
    synth->add_option("--attachment-m", synth_cfg.attachment_m, "Edges per attached node");
    synth->add_option("--duration-days", synth_cfg.duration_days, "Simulated time span");
    synth->add_option("--phishing", synth_cfg.phishing_count, "Phishing principals");
    synth->add_option("--scams", synth_cfg.scam_count, "Mimic-scam principals");
    synth->add_option("--value-mu", synth_cfg.value_mu, "Lognormal ETH mu");
    synth->add_option("--value-sigma", synth_cfg.value_sigma, "Lognormal ETH sigma");
    synth->add_option("--activity", synth_cfg.edge_activity,
                      "Mean extra transactions per relationship");
    synth->add_option("--format", synth_format, "Transactions file format")
        ->check(CLI::IsMember({"csv", "jsonl"}));

    CLI::App* ingest = app.add_subcommand("ingest", "Build a graph from transaction files")->configurable();
    add_common(ingest, ingest_common, "Output graph path (.ssgr)");
    ingest->add_option("--tx", tx_path, "Transactions CSV/JSONL")->required();
    ingest->add_option("--labels", labels_path, "Labels CSV (address,label)");
    ingest->add_option("--format", ingest_format, "Transactions file format")
        ->check(CLI::IsMember({"csv", "jsonl"}));
    ingest->add_flag("--allow-self-loops", allow_self_loops, "Keep self transfers");

    CLI::App* sample = app.add_subcommand("sample", "Run walks and write the cache")->configurable();
    add_common(sample, sample_common, "Output walk cache path (.jsonl)");
    sample->add_option("--graph", graph_path, "Serialized graph")->required();
    add_walk(sample, walk_opts);

    CLI::App* traincmd = app.add_subcommand("train", "Train the detection pipeline")->configurable();
    add_common(traincmd, train_common, "Output directory");
    traincmd->add_option("--graph", graph_path, "Serialized graph")->required();
    traincmd->add_option("--walks", walks_path, "Walk cache from sample")->required();
    add_walk(traincmd, walk_opts);
    add_model(traincmd, model_opts);
    add_train(traincmd, train_opts);

    CLI::App* evalcmd = app.add_subcommand("eval", "Evaluate a checkpoint")->configurable();
    add_common(evalcmd, eval_common, "Output metrics JSON path");
    evalcmd->add_option("--graph", graph_path, "Serialized graph")->required();
    evalcmd->add_option("--walks", walks_path, "Walk cache from sample")->required();
    evalcmd->add_option("--checkpoint", ckpt_path, "Trained pipeline")->required();
    evalcmd->add_option("--split", eval_split, "Item subset to score")
        ->check(CLI::IsMember({"test", "train", "full"}));
    add_walk(evalcmd, walk_opts);
    std::vector<CLI::Option*> eval_dims;
    eval_dims.push_back(evalcmd->add_option("--d-h", model_opts.d_h, "Subgraph embedding width"));
    eval_dims.push_back(evalcmd->add_option("--heads", model_opts.heads, "Attention heads"));
    eval_dims.push_back(evalcmd->add_option("--n-max", model_opts.n_max, "Aligned rows"));
    eval_dims.push_back(evalcmd->add_option("--d-model", model_opts.d_model, "Model width"));
    eval_dims.push_back(evalcmd->add_option("--blocks", model_opts.blocks, "Blocks"));
    eval_dims.push_back(evalcmd->add_option("--m-max", model_opts.m_max, "Sequence length"));
    add_train(evalcmd, train_opts);

    CLI::App* ablate = app.add_subcommand("ablate", "Compare full model against ablations")->configurable();
    add_common(ablate, ablate_common, "Output directory");
    ablate->add_option("--graph", graph_path, "Serialized graph")->required();
    ablate->add_option("--walks", walks_path, "Walk cache from sample")->required();
    add_walk(ablate, walk_opts);
    add_model(ablate, model_opts);
    add_train(ablate, train_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return 3;
    }

    try {
        if (synth->parsed()) return run_synth(synth_common, synth_cfg, synth_format);
        if (ingest->parsed())
            return run_ingest(ingest_common, tx_path, labels_path, ingest_format,
                              allow_self_loops);
        if (sample->parsed()) return run_sample(sample_common, graph_path, walk_opts);
        if (traincmd->parsed())
            return run_train(train_common, graph_path, walks_path, walk_opts, model_opts,
                             train_opts);
        if (evalcmd->parsed())
            return run_eval(eval_common, graph_path, walks_path, ckpt_path, walk_opts, model_opts,
                            eval_dims, train_opts, eval_split);
        if (ablate->parsed())
            return run_ablate(ablate_common, graph_path, walks_path, walk_opts, model_opts,
                              train_opts);
    } catch (const FileError& e) {
        std::cerr << "error: file: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "error: data: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
