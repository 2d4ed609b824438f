#pragma once

// Supervised training over walk datasets: account-level stratified
// split, Adam on optionally class-weighted cross-entropy, early
// stopping on held-out weighted F1, per-account probability averaging
// at evaluation time, and the ablation harness.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "ssw/encoder.hpp"
#include "ssw/features.hpp"
#include "ssw/seqmodel.hpp"
#include "ssw/strwalk.hpp"
#include "ssw/txgraph.hpp"

namespace ssw::train {

struct TrainItem {
    std::uint32_t account = 0;
    std::size_t label = 0;
    std::vector<feat::Prepared> pres;  // encoder path when non-empty
    nn::Tensor phi;                    // precomputed-Phi path otherwise
    std::size_t phi_len = 0;
};

struct Dataset {
    std::vector<TrainItem> items;
    std::size_t n_classes = 3;

    std::uint64_t content_hash() const;
};

// one item per walk whose start account carries a label
Dataset build_dataset(const tx::TemporalMultigraph& g,
                      const std::vector<walk::SubgraphSequence>& seqs,
                      std::size_t n_classes = 3);

enum class Ablation { none, no_graph_layer, conventional_transformer };
const char* ablation_name(Ablation a);

struct PipelineConfig {
    enc::EncoderConfig encoder;
    seq::SeqConfig model;  // model.d_phi must equal encoder.d_h
};

struct TrainConfig {
    double lr = 1e-3;
    double beta1 = 0.9, beta2 = 0.999;
    std::size_t max_epochs = 200;
    std::size_t patience = 10;
    std::size_t batch_size = 16;  // 0 = full batch
    double train_frac = 0.8;
    std::uint64_t seed = 0;
    std::vector<double> class_weights;  // empty = uniform
    Ablation ablation = Ablation::none;
    bool restore_best = true;  // false: keep final-epoch parameters
};

nlohmann::json config_json(const PipelineConfig& pc, const TrainConfig& tc);
std::string config_hash(const PipelineConfig& pc, const TrainConfig& tc);

// w_c = total / (C * count_c) over the dataset's items; 0 for absent classes
std::vector<double> inverse_frequency_weights(const Dataset& ds);

struct ClassMetrics {
    double precision = 0.0, recall = 0.0, f1 = 0.0;
    std::size_t support = 0;
};

struct MetricsReport {
    std::vector<ClassMetrics> per_class;
    double weighted_f1 = 0.0, macro_f1 = 0.0;
    std::vector<std::vector<std::size_t>> confusion;  // true x predicted
    std::string config_hash, dataset_hash;
    std::uint64_t seed = 0;

    nlohmann::json to_json() const;
    std::string table() const;
};

MetricsReport compute_metrics(const std::vector<std::vector<std::size_t>>& confusion);

struct Split {
    std::vector<std::size_t> train, test;  // item indices
};

// account-level: all items of an account land on one side, per class
Split stratified_split(const Dataset& ds, double train_frac, std::uint64_t seed);

struct Pipeline {
    enc::Encoder encoder;
    seq::SeqModel model;

    std::vector<nn::Tensor> parameters() const;
    std::vector<std::pair<std::string, nn::Tensor>> named_parameters() const;
};

Pipeline make_pipeline(const PipelineConfig& pc, Ablation ablation);

// class probabilities for one item (inference, no recording)
std::vector<double> item_probs(const Pipeline& p, const TrainItem& item);

struct AccountPrediction {
    std::uint32_t account = 0;
    std::size_t label = 0, pred = 0;
    std::vector<double> probs;  // averaged over the account's items
};

std::vector<AccountPrediction> account_predictions(const Pipeline& p, const Dataset& ds,
                                                   const std::vector<std::size_t>& idx);

MetricsReport evaluate(const Pipeline& p, const Dataset& ds, const std::vector<std::size_t>& idx);

struct TrainResult {
    Pipeline pipeline;
    MetricsReport metrics;           // held-out metrics of the kept parameters
    std::vector<double> loss_curve;  // mean batch loss per epoch
    std::size_t best_epoch = 0;
    Split split;
};

TrainResult train(const Dataset& ds, const PipelineConfig& pc, const TrainConfig& tc);

void save_pipeline(const std::string& path, const Pipeline& p);
struct LoadedPipeline {
    Pipeline pipeline;
    PipelineConfig config;
};
LoadedPipeline load_pipeline(const std::string& path);

struct AblationRow {
    std::string name;
    double weighted_f1 = 0.0, delta_vs_full = 0.0;
    std::size_t best_epoch = 0;
    std::string config_hash;
};

struct AblationReport {
    std::vector<AblationRow> rows;  // full first
    std::string dataset_hash;

    nlohmann::json to_json() const;
    std::string table() const;
};

AblationReport run_ablation(const Dataset& ds, const PipelineConfig& pc, const TrainConfig& tc);

// multinomial logistic regression on standardized inputs, full-batch
// gradient descent from zero weights; returns final training accuracy
double logistic_probe_accuracy(const std::vector<std::vector<double>>& x,
                               const std::vector<std::size_t>& y, std::size_t classes,
                               std::size_t epochs = 300, double lr = 0.5);

}  // namespace ssw::train
