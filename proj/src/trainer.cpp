#include "ssw/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ssw/errors.hpp"
#include "ssw/hash.hpp"
#include "ssw/checkpoint.hpp"
#include "ssw/ops.hpp"
#include "ssw/optim.hpp"
#include "ssw/rng.hpp"

namespace ssw::train {

namespace {

std::uint64_t hash_doubles(const std::vector<double>& v, std::uint64_t h) {
    return fnv1a(v.data(), v.size() * sizeof(double), h);
}

std::uint64_t hash_u64(std::uint64_t x, std::uint64_t h) { return fnv1a(&x, sizeof(x), h); }

nlohmann::json encoder_config_json(const enc::EncoderConfig& c) {
    return {{"d_in", c.d_in},
            {"d_h", c.d_h},
            {"heads", c.heads},
            {"n_max", c.n_max},
            {"mean_readout", c.mean_readout},
            {"use_attention", c.use_attention},
            {"seed", hex_u64(c.seed)}};
}

enc::EncoderConfig encoder_config_from_json(const nlohmann::json& j) {
    enc::EncoderConfig c;
    try {
        c.d_in = j.at("d_in").get<std::size_t>();
        c.d_h = j.at("d_h").get<std::size_t>();
        c.heads = j.at("heads").get<std::size_t>();
        c.n_max = j.at("n_max").get<std::size_t>();
        c.mean_readout = j.at("mean_readout").get<bool>();
        c.use_attention = j.at("use_attention").get<bool>();
        c.seed = std::stoull(j.at("seed").get<std::string>(), nullptr, 16);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("encoder config: ") + e.what());
    } catch (const std::logic_error&) {
        throw DataError("encoder config: bad seed field");
    }
    return c;
}

enc::SequenceFeature item_sequence(const Pipeline& p, const TrainItem& item) {
    if (!item.pres.empty()) return enc::encode_prepared(item.pres, p.encoder);
    if (!item.phi.defined()) throw std::invalid_argument("train item has neither walks nor Phi");
    return {item.phi, item.phi_len};
}

nn::Tensor item_logits(const Pipeline& p, const TrainItem& item) {
    return seq::forward(p.model, seq::pad_sequence(item_sequence(p, item), p.model.cfg.m_max));
}

void validate_train_config(const Dataset& ds, const TrainConfig& tc) {
    if (!(tc.lr > 0.0)) throw std::invalid_argument("train: lr must be positive");
    if (!(tc.train_frac > 0.0 && tc.train_frac < 1.0))
        throw std::invalid_argument("train: train_frac must lie in (0,1)");
    if (!tc.class_weights.empty() && tc.class_weights.size() != ds.n_classes)
        throw std::invalid_argument("train: class_weights size " +
                                    std::to_string(tc.class_weights.size()) + " != n_classes " +
                                    std::to_string(ds.n_classes));
    if (tc.max_epochs == 0) throw std::invalid_argument("train: max_epochs must be positive");
}

std::vector<std::vector<double>> snapshot(const std::vector<nn::Tensor>& params) {
    std::vector<std::vector<double>> out;
    out.reserve(params.size());
    for (const nn::Tensor& t : params) out.push_back(t.values());
    return out;
}

void restore(std::vector<nn::Tensor>& params, const std::vector<std::vector<double>>& snap) {
    for (std::size_t i = 0; i < params.size(); ++i)
        std::copy(snap[i].begin(), snap[i].end(), params[i].data());
}

}  // namespace

std::uint64_t Dataset::content_hash() const {
    std::uint64_t h = kFnvOffset;
    h = hash_u64(n_classes, h);
    h = hash_u64(items.size(), h);
    for (const TrainItem& it : items) {
        h = hash_u64(it.account, h);
        h = hash_u64(it.label, h);
        h = hash_u64(it.pres.size(), h);
        for (const feat::Prepared& pre : it.pres) {
            h = hash_u64(pre.n, h);
            h = hash_doubles(pre.raw.data, h);
        }
        if (it.phi.defined()) {
            h = hash_u64(it.phi_len, h);
            h = hash_doubles(it.phi.values(), h);
        }
    }
    return h;
}

Dataset build_dataset(const tx::TemporalMultigraph& g,
                      const std::vector<walk::SubgraphSequence>& seqs, std::size_t n_classes) {
    Dataset ds;
    ds.n_classes = n_classes;
    for (const walk::SubgraphSequence& seq : seqs) {
        const tx::Label label = g.account(seq.start).label;
        if (label == tx::Label::unknown) continue;
        const auto cls = static_cast<std::size_t>(label);
        if (cls >= n_classes)
            throw DataError("account " + g.account(seq.start).address + " has label " +
                            tx::label_name(label) + " outside the configured " +
                            std::to_string(n_classes) + " classes");
        TrainItem item;
        item.account = seq.start;
        item.label = cls;
        item.pres = enc::prepare_sequence(g, seq);
        if (item.pres.empty()) continue;  // walk never left the start node
        ds.items.push_back(std::move(item));
    }
    return ds;
}

const char* ablation_name(Ablation a) {
    switch (a) {
        case Ablation::none: return "full";
        case Ablation::no_graph_layer: return "no_graph_layer";
        case Ablation::conventional_transformer: return "conventional_transformer";
    }
    return "?";
}

nlohmann::json config_json(const PipelineConfig& pc, const TrainConfig& tc) {
    return {{"encoder", encoder_config_json(pc.encoder)},
            {"model", seq::config_json(pc.model)},
            {"train",
             {{"lr", tc.lr},
              {"beta1", tc.beta1},
              {"beta2", tc.beta2},
              {"max_epochs", tc.max_epochs},
              {"patience", tc.patience},
              {"batch_size", tc.batch_size},
              {"train_frac", tc.train_frac},
              {"seed", hex_u64(tc.seed)},
              {"class_weights", tc.class_weights},
              {"restore_best", tc.restore_best}}},
            {"ablation", ablation_name(tc.ablation)}};
}

std::string config_hash(const PipelineConfig& pc, const TrainConfig& tc) {
    return hex_u64(fnv1a(config_json(pc, tc).dump()));
}

std::vector<double> inverse_frequency_weights(const Dataset& ds) {
    std::vector<std::size_t> counts(ds.n_classes, 0);
    for (const TrainItem& it : ds.items) ++counts[it.label];
    std::vector<double> w(ds.n_classes, 0.0);
    for (std::size_t c = 0; c < ds.n_classes; ++c)
        if (counts[c] > 0)
            w[c] = static_cast<double>(ds.items.size()) /
                   (static_cast<double>(ds.n_classes) * static_cast<double>(counts[c]));
    return w;
}

MetricsReport compute_metrics(const std::vector<std::vector<std::size_t>>& confusion) {
    const std::size_t c = confusion.size();
    if (c == 0) throw DataError("metrics: empty confusion matrix");
    for (const auto& row : confusion)
        if (row.size() != c) throw DataError("metrics: confusion matrix is not square");

    MetricsReport rep;
    rep.confusion = confusion;
    rep.per_class.resize(c);
    std::size_t total = 0;
    for (std::size_t i = 0; i < c; ++i) {
        std::size_t row_sum = 0, col_sum = 0;
        for (std::size_t j = 0; j < c; ++j) {
            row_sum += confusion[i][j];
            col_sum += confusion[j][i];
        }
        ClassMetrics& m = rep.per_class[i];
        m.support = row_sum;
        total += row_sum;
        const double tp = static_cast<double>(confusion[i][i]);
        m.precision = col_sum > 0 ? tp / static_cast<double>(col_sum) : 0.0;
        m.recall = row_sum > 0 ? tp / static_cast<double>(row_sum) : 0.0;
        m.f1 = m.precision + m.recall > 0.0
                   ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                   : 0.0;
    }
    if (total == 0) throw DataError("metrics: confusion matrix has no samples");
    for (std::size_t i = 0; i < c; ++i) {
        rep.weighted_f1 += static_cast<double>(rep.per_class[i].support) /
                           static_cast<double>(total) * rep.per_class[i].f1;
        rep.macro_f1 += rep.per_class[i].f1 / static_cast<double>(c);
    }
    return rep;
}

nlohmann::json MetricsReport::to_json() const {
    auto classes = nlohmann::json::array();
    for (std::size_t i = 0; i < per_class.size(); ++i)
        classes.push_back({{"class", i},
                           {"precision", per_class[i].precision},
                           {"recall", per_class[i].recall},
                           {"f1", per_class[i].f1},
                           {"support", per_class[i].support}});
    return {{"per_class", classes},   {"weighted_f1", weighted_f1},
            {"macro_f1", macro_f1},   {"confusion", confusion},
            {"config_hash", config_hash}, {"dataset_hash", dataset_hash},
            {"seed", seed}};
}

std::string MetricsReport::table() const {
    std::ostringstream os;
    os << "class  precision  recall     f1         support\n";
    char buf[96];
    for (std::size_t i = 0; i < per_class.size(); ++i) {
        const ClassMetrics& m = per_class[i];
        std::snprintf(buf, sizeof(buf), "%-5zu  %-9.4f  %-9.4f  %-9.4f  %zu\n", i, m.precision,
                      m.recall, m.f1, m.support);
        os << buf;
    }
    std::snprintf(buf, sizeof(buf), "weighted F1 %.4f   macro F1 %.4f\n", weighted_f1, macro_f1);
    os << buf;
    return os.str();
}

Split stratified_split(const Dataset& ds, double train_frac, std::uint64_t seed) {
    // account -> (label, item indices); map keeps order deterministic
    std::map<std::uint32_t, std::pair<std::size_t, std::vector<std::size_t>>> accounts;
    for (std::size_t i = 0; i < ds.items.size(); ++i) {
        auto& slot = accounts[ds.items[i].account];
        slot.first = ds.items[i].label;
        slot.second.push_back(i);
    }
    std::vector<std::vector<std::uint32_t>> by_class(ds.n_classes);
    for (const auto& [account, entry] : accounts) by_class[entry.first].push_back(account);

    Split out;
    Rng rng(seed);
    for (auto& accs : by_class) {
        for (std::size_t i = accs.size(); i > 1; --i)
            std::swap(accs[i - 1], accs[rng.below(i)]);
        const auto n_train = static_cast<std::size_t>(train_frac * static_cast<double>(accs.size()));
        for (std::size_t i = 0; i < accs.size(); ++i) {
            const auto& items = accounts[accs[i]].second;
            auto& side = i < n_train ? out.train : out.test;
            side.insert(side.end(), items.begin(), items.end());
        }
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

std::vector<nn::Tensor> Pipeline::parameters() const {
    std::vector<nn::Tensor> out = encoder.parameters();
    for (nn::Tensor& t : model.parameters()) out.push_back(t);
    return out;
}

std::vector<std::pair<std::string, nn::Tensor>> Pipeline::named_parameters() const {
    std::vector<std::pair<std::string, nn::Tensor>> out;
    out.emplace_back("enc.w_agg", encoder.w_agg);
    out.emplace_back("enc.w_proj", encoder.gat.w_proj);
    out.emplace_back("enc.attn", encoder.gat.attn);
    for (auto& [name, t] : model.named_parameters()) out.emplace_back("model." + name, t);
    return out;
}

Pipeline make_pipeline(const PipelineConfig& pc, Ablation ablation) {
    PipelineConfig cfg = pc;
    if (cfg.model.d_phi != cfg.encoder.d_h)
        throw std::invalid_argument("pipeline: model d_phi " + std::to_string(cfg.model.d_phi) +
                                    " != encoder d_h " + std::to_string(cfg.encoder.d_h));
    if (ablation == Ablation::no_graph_layer) {
        cfg.encoder.use_attention = false;
        cfg.encoder.mean_readout = true;  // masked mean of linearly mapped rows
    } else if (ablation == Ablation::conventional_transformer) {
        cfg.model.transposed = false;
    }
    return {enc::make_encoder(cfg.encoder), seq::make_seqmodel(cfg.model)};
}

std::vector<double> item_probs(const Pipeline& p, const TrainItem& item) {
    const nn::Tensor logits = item_logits(p, item);
    return nn::softmax_values(logits.data(), logits.size());
}

std::vector<AccountPrediction> account_predictions(const Pipeline& p, const Dataset& ds,
                                                   const std::vector<std::size_t>& idx) {
    if (idx.empty()) throw DataError("evaluation split is empty");
    std::map<std::uint32_t, AccountPrediction> by_account;
    std::map<std::uint32_t, std::size_t> walk_counts;
    for (std::size_t i : idx) {
        const TrainItem& item = ds.items.at(i);
        const std::vector<double> probs = item_probs(p, item);
        AccountPrediction& ap = by_account[item.account];
        if (ap.probs.empty()) {
            ap.account = item.account;
            ap.label = item.label;
            ap.probs.assign(probs.size(), 0.0);
        }
        for (std::size_t c = 0; c < probs.size(); ++c) ap.probs[c] += probs[c];
        ++walk_counts[item.account];
    }
    std::vector<AccountPrediction> out;
    out.reserve(by_account.size());
    for (auto& [account, ap] : by_account) {
        const auto n = static_cast<double>(walk_counts[account]);
        for (double& v : ap.probs) v /= n;
        ap.pred = static_cast<std::size_t>(
            std::max_element(ap.probs.begin(), ap.probs.end()) - ap.probs.begin());
        out.push_back(std::move(ap));
    }
    return out;
}

MetricsReport evaluate(const Pipeline& p, const Dataset& ds, const std::vector<std::size_t>& idx) {
    std::vector<std::vector<std::size_t>> confusion(ds.n_classes,
                                                    std::vector<std::size_t>(ds.n_classes, 0));
    for (const AccountPrediction& ap : account_predictions(p, ds, idx))
        ++confusion[ap.label][ap.pred];
    return compute_metrics(confusion);
}

TrainResult train(const Dataset& ds, const PipelineConfig& pc, const TrainConfig& tc) {
    validate_train_config(ds, tc);
    if (ds.items.empty()) throw DataError("train: dataset is empty");
    {
        std::vector<bool> present(ds.n_classes, false);
        for (const TrainItem& it : ds.items) present.at(it.label) = true;
        if (std::count(present.begin(), present.end(), true) < 2)
            throw DataError("train: dataset holds a single labeled class");
    }

    TrainResult res;
    res.split = stratified_split(ds, tc.train_frac, tc.seed);
    if (res.split.train.empty() || res.split.test.empty())
        throw DataError("train: empty split (train " + std::to_string(res.split.train.size()) +
                        ", test " + std::to_string(res.split.test.size()) + ")");

    res.pipeline = make_pipeline(pc, tc.ablation);
    std::vector<double> cw = tc.class_weights;
    if (cw.empty()) cw.assign(ds.n_classes, 1.0);

    std::vector<nn::Tensor> params = res.pipeline.parameters();
    nn::Adam opt(params, tc.lr, tc.beta1, tc.beta2);

    const std::size_t batch =
        tc.batch_size == 0 ? res.split.train.size() : std::min(tc.batch_size, res.split.train.size());
    std::vector<std::size_t> order = res.split.train;
    Rng shuffle_rng(tc.seed ^ 0x74726e5353ULL);

    double best_f1 = -1.0;
    std::vector<std::vector<double>> best_params;
    MetricsReport best_metrics;
    std::size_t since_best = 0;

    for (std::size_t epoch = 0; epoch < tc.max_epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);

        double epoch_loss = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t b0 = 0; b0 < order.size(); b0 += batch) {
            const std::size_t b1 = std::min(b0 + batch, order.size());
            double batch_weight = 0.0;
            for (std::size_t k = b0; k < b1; ++k) batch_weight += cw[ds.items[order[k]].label];
            if (batch_weight <= 0.0) continue;
            double batch_loss = 0.0;
            for (std::size_t k = b0; k < b1; ++k) {
                const TrainItem& item = ds.items[order[k]];
                nn::Tape tape;
                nn::TapeScope scope(tape);
                const nn::Tensor loss = nn::cross_entropy(item_logits(res.pipeline, item),
                                                          item.label, cw[item.label] / batch_weight);
                tape.backward(loss);
                batch_loss += loss.item();
            }
            opt.step();
            opt.zero_grad();
            epoch_loss += batch_loss;
            ++n_batches;
        }
        res.loss_curve.push_back(epoch_loss / static_cast<double>(n_batches));

        const MetricsReport m = evaluate(res.pipeline, ds, res.split.test);
        if (m.weighted_f1 > best_f1) {
            best_f1 = m.weighted_f1;
            best_params = snapshot(params);
            best_metrics = m;
            res.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= tc.patience) {
            break;
        }
    }

    if (tc.restore_best) {
        restore(params, best_params);
        res.metrics = best_metrics;
    } else {
        res.metrics = evaluate(res.pipeline, ds, res.split.test);
    }
    res.metrics.config_hash = config_hash(pc, tc);
    res.metrics.dataset_hash = hex_u64(ds.content_hash());
    res.metrics.seed = tc.seed;
    return res;
}

void save_pipeline(const std::string& path, const Pipeline& p) {
    const nlohmann::json config = {{"encoder", encoder_config_json(p.encoder.cfg)},
                                   {"model", seq::config_json(p.model.cfg)}};
    ckpt::save_checkpoint(path, config, p.named_parameters());
}

LoadedPipeline load_pipeline(const std::string& path) {
    const ckpt::LoadedCheckpoint loaded = ckpt::load_checkpoint(path);
    LoadedPipeline out;
    try {
        out.config.encoder = encoder_config_from_json(loaded.config.at("encoder"));
        out.config.model = seq::config_from_json(loaded.config.at("model"));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": bad pipeline config: " + e.what());
    }
    if (out.config.model.d_phi != out.config.encoder.d_h)
        throw DataError(path + ": model d_phi does not match encoder d_h");
    out.pipeline = {enc::make_encoder(out.config.encoder), seq::make_seqmodel(out.config.model)};
    ckpt::restore_into(loaded, out.pipeline.named_parameters());
    return out;
}

nlohmann::json AblationReport::to_json() const {
    auto arr = nlohmann::json::array();
    for (const AblationRow& r : rows)
        arr.push_back({{"name", r.name},
                       {"weighted_f1", r.weighted_f1},
                       {"delta_vs_full", r.delta_vs_full},
                       {"best_epoch", r.best_epoch},
                       {"config_hash", r.config_hash}});
    return {{"rows", arr}, {"dataset_hash", dataset_hash}};
}

std::string AblationReport::table() const {
    std::ostringstream os;
    os << "variant                   weighted_f1  delta     best_epoch\n";
    char buf[96];
    for (const AblationRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%-25s %-12.4f %+-9.4f %zu\n", r.name.c_str(),
                      r.weighted_f1, r.delta_vs_full, r.best_epoch);
        os << buf;
    }
    return os.str();
}

AblationReport run_ablation(const Dataset& ds, const PipelineConfig& pc, const TrainConfig& tc) {
    AblationReport rep;
    rep.dataset_hash = hex_u64(ds.content_hash());
    double full_f1 = 0.0;
    for (Ablation a :
         {Ablation::none, Ablation::no_graph_layer, Ablation::conventional_transformer}) {
        TrainConfig variant = tc;
        variant.ablation = a;
        const TrainResult r = train(ds, pc, variant);
        AblationRow row;
        row.name = ablation_name(a);
        row.weighted_f1 = r.metrics.weighted_f1;
        row.best_epoch = r.best_epoch;
        row.config_hash = config_hash(pc, variant);
        if (a == Ablation::none) full_f1 = row.weighted_f1;
        row.delta_vs_full = row.weighted_f1 - full_f1;
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

double logistic_probe_accuracy(const std::vector<std::vector<double>>& x,
                               const std::vector<std::size_t>& y, std::size_t classes,
                               std::size_t epochs, double lr) {
    if (x.empty() || x.size() != y.size())
        throw std::invalid_argument("probe: inputs and labels must align and be non-empty");
    const std::size_t n = x.size(), d = x[0].size();

    // standardize per feature
    std::vector<double> mean(d, 0.0), stdev(d, 0.0);
    for (const auto& row : x)
        for (std::size_t j = 0; j < d; ++j) mean[j] += row[j] / static_cast<double>(n);
    for (const auto& row : x)
        for (std::size_t j = 0; j < d; ++j) {
            const double c = row[j] - mean[j];
            stdev[j] += c * c / static_cast<double>(n);
        }
    for (double& s : stdev) s = std::sqrt(s);
    std::vector<double> z(n * d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            z[i * d + j] = stdev[j] > 0.0 ? (x[i][j] - mean[j]) / stdev[j] : 0.0;

    std::vector<double> w(classes * (d + 1), 0.0);  // row-major, last column bias
    std::vector<double> logits(classes), grad(classes * (d + 1));
    for (std::size_t e = 0; e < epochs; ++e) {
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < classes; ++c) {
                double s = w[c * (d + 1) + d];
                for (std::size_t j = 0; j < d; ++j) s += w[c * (d + 1) + j] * z[i * d + j];
                logits[c] = s;
            }
            const double mx = *std::max_element(logits.begin(), logits.end());
            double zsum = 0.0;
            for (double& v : logits) zsum += (v = std::exp(v - mx));
            for (std::size_t c = 0; c < classes; ++c) {
                const double p = logits[c] / zsum - (c == y[i] ? 1.0 : 0.0);
                for (std::size_t j = 0; j < d; ++j)
                    grad[c * (d + 1) + j] += p * z[i * d + j] / static_cast<double>(n);
                grad[c * (d + 1) + d] += p / static_cast<double>(n);
            }
        }
        for (std::size_t k = 0; k < w.size(); ++k) w[k] -= lr * grad[k];
    }

    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        double best_s = -1e300;
        for (std::size_t c = 0; c < classes; ++c) {
            double s = w[c * (d + 1) + d];
            for (std::size_t j = 0; j < d; ++j) s += w[c * (d + 1) + j] * z[i * d + j];
            if (s > best_s) {
                best_s = s;
                best = c;
            }
        }
        correct += best == y[i] ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(n);
}

}  // namespace ssw::train
