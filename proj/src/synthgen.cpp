#include "ssw/synthgen.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "ssw/errors.hpp"
#include "ssw/hash.hpp"
#include "ssw/rng.hpp"

namespace ssw::synth {

namespace {

std::string synth_address(std::size_t i) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "0x%040zx", i + 1);
    return buf;
}

tx::u128 to_wei(double eth) {
    if (eth < 0.0) eth = 0.0;
    if (eth > 1e9) eth = 1e9;
    return static_cast<tx::u128>(eth * 1e18) + 1;
}

class Builder {
public:
    explicit Builder(const SynthConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
        t0_ = kEpoch;
        t1_ = kEpoch + static_cast<std::uint64_t>(cfg.duration_days) * 86400ULL;
    }

    SynthResult run() {
        validate();
        build_skeleton();
        background_traffic();
        pick_principals();
        benign_events();
        for (std::uint32_t p : phishing_) inject_phishing(p);
        for (std::size_t i = 0; i < scams_.size(); ++i) inject_scam(scams_[i], depths_[i]);
        assign_labels();
        log_principal_background();
        res_.graph.finalize();
        return std::move(res_);
    }

private:
    void validate() {
        if (cfg_.attachment_m < 1) throw ConfigError("synth: attachment_m must be >= 1");
        if (cfg_.duration_days < 1) throw ConfigError("synth: duration_days must be >= 1");
        if (cfg_.phishing_count + cfg_.scam_count >= cfg_.n_accounts)
            throw ConfigError("synth: motif principals (" +
                              std::to_string(cfg_.phishing_count + cfg_.scam_count) +
                              ") must be fewer than accounts (" +
                              std::to_string(cfg_.n_accounts) + ")");
        const std::size_t m0 = std::max<std::size_t>(3, cfg_.attachment_m + 1);
        std::size_t mule_total = 0;
        for (std::size_t i = 0; i < cfg_.scam_count; ++i) {
            depths_.push_back(2 + rng_.below(3));
            mule_total += depths_.back();
        }
        n_base_ = cfg_.n_accounts - mule_total;  // mules live outside the skeleton
        const std::size_t principals = cfg_.phishing_count + cfg_.scam_count;
        if (cfg_.n_accounts < mule_total || n_base_ < m0 + 4 * principals + 1)
            throw ConfigError("synth: " + std::to_string(cfg_.n_accounts) +
                              " accounts cannot host " + std::to_string(principals) +
                              " motif principals with their victims and mules");
    }

    std::uint64_t quantize(double t) {
        if (t < static_cast<double>(t0_)) t = static_cast<double>(t0_);
        if (t >= static_cast<double>(t1_)) t = static_cast<double>(t1_ - 1);
        const std::uint64_t block = (static_cast<std::uint64_t>(t) - t0_) / kBlockSeconds;
        return t0_ + block * kBlockSeconds;
    }

    std::uint32_t add_tx(std::uint32_t from, std::uint32_t to, double eth, double t) {
        const std::uint64_t ts = quantize(t);
        return res_.graph.add_edge(from, to, to_wei(eth), ts, (ts - t0_) / kBlockSeconds);
    }

    double draw_eth() { return rng_.lognormal(cfg_.value_mu, cfg_.value_sigma); }
    double draw_time() { return rng_.uniform(static_cast<double>(t0_), static_cast<double>(t1_)); }

    void build_skeleton() {
        const std::size_t m0 = std::max<std::size_t>(3, cfg_.attachment_m + 1);
        for (std::size_t i = 0; i < n_base_; ++i) res_.graph.intern(synth_address(i));
        for (std::size_t i = 0; i < m0; ++i)
            add_relation(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>((i + 1) % m0));
        for (std::size_t v = m0; v < n_base_; ++v) {
            std::set<std::uint32_t> targets;
            std::size_t attempts = 0;
            while (targets.size() < cfg_.attachment_m) {
                std::uint32_t cand = pool_[rng_.below(pool_.size())];
                if (++attempts > 64) cand = static_cast<std::uint32_t>(rng_.below(v));
                if (cand != v) targets.insert(cand);
            }
            for (std::uint32_t t : targets) add_relation(static_cast<std::uint32_t>(v), t);
        }
    }

    void add_relation(std::uint32_t a, std::uint32_t b) {
        relations_.emplace_back(a, b);
        pool_.push_back(a);
        pool_.push_back(b);
    }

    void background_traffic() {
        for (const auto& [a, b] : relations_) {
            const std::uint64_t k = 1 + rng_.poisson(cfg_.edge_activity);
            for (std::uint64_t i = 0; i < k; ++i) {
                const bool forward = rng_.below(2) == 0;
                add_tx(forward ? a : b, forward ? b : a, draw_eth(), draw_time());
            }
        }
    }

    std::uint32_t draw_weighted_account(const std::unordered_set<std::uint32_t>& excluded) {
        for (;;) {
            const std::uint32_t cand = pool_[rng_.below(pool_.size())];
            if (!excluded.count(cand)) return cand;
        }
    }

    std::uint32_t draw_uniform_account(const std::unordered_set<std::uint32_t>& excluded) {
        for (;;) {
            const auto cand = static_cast<std::uint32_t>(rng_.below(n_base_));
            if (!excluded.count(cand)) return cand;
        }
    }

    // Principals are ordinary accounts, and benign_events gives ordinary
    // accounts the same aggregate footprint, so degree and volume totals
    // carry no class signal; only the temporal shape of the motif does.
    void pick_principals() {
        for (std::size_t i = 0; i < cfg_.phishing_count; ++i) {
            const std::uint32_t p = draw_uniform_account(principals_);
            principals_.insert(p);
            phishing_.push_back(p);
        }
        for (std::size_t i = 0; i < cfg_.scam_count; ++i) {
            const std::uint32_t s = draw_uniform_account(principals_);
            principals_.insert(s);
            scams_.push_back(s);
        }
    }

    // Aggregate look-alikes on ordinary accounts. Deposit surges copy the
    // funnel's fan-in totals but spend gradually; merchant cycles copy the
    // mimic scam's client traffic and settlement cadence but pay one
    // established treasury instead of layering through fresh accounts;
    // whale transfers blur the volume tails. Degree and value statistics
    // stop separating the classes while the temporal shape still does.
    void benign_events() {
        const std::size_t n_events = (n_base_ * 3) / 5;
        for (std::size_t i = 0; i < n_events; ++i) {
            const std::uint32_t a = draw_uniform_account(principals_);
            switch (rng_.below(3)) {
                case 0: deposit_surge(a); break;
                case 1: merchant_cycle(a); break;
                default: whale_transfer(a); break;
            }
        }
    }

    void deposit_surge(std::uint32_t a) {
        std::unordered_set<std::uint32_t> used{a};
        const std::size_t fan = 10 + rng_.below(15);
        const double window = static_cast<double>(t1_ - t0_);
        const double start = static_cast<double>(t0_) + rng_.uniform(0.05, 0.75) * window;
        const double len = rng_.uniform(6.0, 18.0) * 3600.0;
        double haul = 0.0;
        for (std::size_t v = 0; v < fan; ++v) {
            // surge money comes from active traders, not one-shot victims
            const std::uint32_t payer = draw_weighted_account(used);
            used.insert(payer);
            const std::uint64_t deposits = 1 + rng_.below(2);
            for (std::uint64_t dep = 0; dep < deposits; ++dep) {
                const double eth = draw_eth();
                haul += eth;
                add_tx(payer, a, eth, start + rng_.uniform() * len);
            }
        }
        const std::size_t spends = 3 + rng_.below(4);
        for (std::size_t sp = 0; sp < spends; ++sp) {
            const double t = start + len + rng_.uniform(2.0, 12.0) * 86400.0;
            add_tx(a, draw_weighted_account(used), 0.9 * haul / static_cast<double>(spends), t);
        }
    }

    void merchant_cycle(std::uint32_t a) {
        std::unordered_set<std::uint32_t> used{a};
        const std::size_t n_clients = 8 + rng_.below(14);
        for (std::size_t c = 0; c < n_clients; ++c) {
            const std::uint32_t client = draw_uniform_account(used);
            used.insert(client);
            const std::uint64_t k = 1 + rng_.poisson(1.5);
            for (std::uint64_t i = 0; i < k; ++i) {
                const bool inbound = rng_.below(2) == 0;
                if (inbound) add_tx(client, a, draw_eth(), draw_time());
                else add_tx(a, client, draw_eth(), draw_time());
            }
        }
        const std::uint32_t treasury = draw_weighted_account(used);
        const double window = static_cast<double>(t1_ - t0_);
        const std::size_t events = 7 + rng_.below(5);
        for (std::size_t ev = 0; ev < events; ++ev) {
            const double jitter = rng_.uniform(-6.0, 6.0) * 3600.0;
            const double t = static_cast<double>(t0_) +
                             window * static_cast<double>(ev + 1) / static_cast<double>(events + 1) +
                             jitter;
            const double amount = draw_eth() * rng_.uniform(4.0, 15.0);
            const std::size_t parts = 3 + rng_.below(2);
            for (std::size_t part = 0; part < parts; ++part)
                add_tx(a, treasury, amount / static_cast<double>(parts),
                       t + rng_.uniform(0.0, 600.0));
        }
    }

    void whale_transfer(std::uint32_t a) {
        std::unordered_set<std::uint32_t> used{a};
        const std::uint64_t k = 1 + rng_.below(3);
        for (std::uint64_t i = 0; i < k; ++i) {
            const std::uint32_t other = draw_weighted_account(used);
            const double eth = draw_eth() * rng_.uniform(8.0, 40.0);
            if (rng_.below(2) == 0) add_tx(a, other, eth, draw_time());
            else add_tx(other, a, eth, draw_time());
        }
    }

    void inject_phishing(std::uint32_t p) {
        Motif motif;
        motif.kind = MotifKind::phishing_funnel;
        motif.principal = p;
        motif.fan_in = 10 + rng_.below(11);

        const double window = static_cast<double>(t1_ - t0_);
        const double burst_start = static_cast<double>(t0_) + rng_.uniform(0.05, 0.75) * window;
        const double burst_len = rng_.uniform(6.0, 18.0) * 3600.0;

        std::unordered_set<std::uint32_t> used = principals_;
        used.insert(p);
        double haul = 0.0;
        for (std::size_t v = 0; v < motif.fan_in; ++v) {
            // victims are ordinary quiet accounts, unlike the active traders
            // behind a benign deposit surge
            const std::uint32_t victim = draw_uniform_account(used);
            used.insert(victim);
            const std::uint64_t deposits = 1 + rng_.below(2);
            for (std::uint64_t d = 0; d < deposits; ++d) {
                const double eth = draw_eth();
                haul += eth;
                const std::uint32_t e =
                    add_tx(victim, p, eth, burst_start + rng_.uniform() * burst_len);
                motif.edges.push_back({e, "victim_deposit"});
            }
        }
        const std::uint32_t sink = draw_weighted_account(used);
        const double cash_out_t = burst_start + burst_len + rng_.uniform(0.5, 3.0) * 3600.0;
        motif.edges.push_back({add_tx(p, sink, 0.9 * haul, cash_out_t), "cash_out"});
        res_.motifs.push_back(std::move(motif));
    }

    void inject_scam(std::uint32_t s, std::size_t depth) {
        Motif motif;
        motif.kind = MotifKind::mimic_scam;
        motif.principal = s;
        motif.depth = depth;
        motif.split = 3 + rng_.below(2);

        // sustained two-way "service" traffic with ordinary counterparties
        std::unordered_set<std::uint32_t> used = principals_;
        const std::size_t n_clients = 8 + rng_.below(8);
        for (std::size_t c = 0; c < n_clients; ++c) {
            const std::uint32_t client = draw_uniform_account(used);
            used.insert(client);
            const std::uint64_t k = 1 + rng_.poisson(1.5);
            for (std::uint64_t i = 0; i < k; ++i) {
                const bool inbound = rng_.below(2) == 0;
                const std::uint32_t e = inbound ? add_tx(client, s, draw_eth(), draw_time())
                                                : add_tx(s, client, draw_eth(), draw_time());
                motif.edges.push_back({e, inbound ? "mimic_in" : "mimic_out"});
            }
        }

        // dedicated mule chain, reused by this principal's periodic outflows
        std::vector<std::uint32_t> mules;
        for (std::size_t d = 0; d < motif.depth; ++d)
            mules.push_back(res_.graph.intern(synth_address(n_base_ + n_mules_++)));

        const double window = static_cast<double>(t1_ - t0_);
        const std::size_t events = 8 + rng_.below(5);
        for (std::size_t ev = 0; ev < events; ++ev) {
            const double jitter = rng_.uniform(-6.0, 6.0) * 3600.0;
            const double start = static_cast<double>(t0_) +
                                 window * static_cast<double>(ev + 1) /
                                     static_cast<double>(events + 1) +
                                 jitter;
            const double amount = draw_eth() * rng_.uniform(4.0, 15.0);
            const double gap = rng_.uniform(0.5, 2.0) * 3600.0;
            std::uint32_t holder = s;
            for (std::size_t hop = 0; hop < mules.size(); ++hop) {
                const double t = start + static_cast<double>(hop + 1) * gap;
                for (std::size_t part = 0; part < motif.split; ++part) {
                    const std::uint32_t e =
                        add_tx(holder, mules[hop], amount / static_cast<double>(motif.split),
                               t + rng_.uniform(0.0, 600.0));
                    motif.edges.push_back({e, "layer_hop"});
                }
                holder = mules[hop];
            }
            const std::uint32_t sink = draw_weighted_account(used);
            const double exit_t = start + static_cast<double>(mules.size() + 1) * gap;
            motif.edges.push_back({add_tx(holder, sink, amount, exit_t), "layer_exit"});
        }
        res_.motifs.push_back(std::move(motif));
    }

    void assign_labels() {
        for (std::uint32_t i = 0; i < res_.graph.num_accounts(); ++i)
            res_.graph.set_label(i, tx::Label::normal);
        for (std::uint32_t p : phishing_) res_.graph.set_label(p, tx::Label::phishing);
        for (std::uint32_t s : scams_) res_.graph.set_label(s, tx::Label::scam);
    }

    // Every edge touching a principal belongs to the ground-truth log; the
    // organic remainder is recorded as normal_activity.
    void log_principal_background() {
        std::unordered_set<std::uint32_t> logged;
        for (const Motif& m : res_.motifs)
            for (const MotifEdge& e : m.edges) logged.insert(e.edge);
        std::vector<std::uint32_t> ordered = phishing_;
        ordered.insert(ordered.end(), scams_.begin(), scams_.end());
        for (std::uint32_t p : ordered) {
            Motif motif;
            motif.kind = MotifKind::normal_activity;
            motif.principal = p;
            for (std::uint32_t e = 0; e < res_.graph.num_edges(); ++e) {
                const tx::Transaction& t = res_.graph.edge(e);
                if ((t.from == p || t.to == p) && logged.insert(e).second)
                    motif.edges.push_back({e, "background"});
            }
            if (!motif.edges.empty()) res_.motifs.push_back(std::move(motif));
        }
    }

    SynthConfig cfg_;
    Rng rng_;
    SynthResult res_;
    std::uint64_t t0_ = 0, t1_ = 0;
    std::size_t n_base_ = 0, n_mules_ = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> relations_;
    std::vector<std::uint32_t> pool_;  // relation endpoints, degree-weighted
    std::unordered_set<std::uint32_t> principals_;
    std::vector<std::uint32_t> phishing_, scams_;
    std::vector<std::size_t> depths_;  // pre-drawn so account totals are exact
};

void write_or_throw(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError("cannot open " + path + " for writing");
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw FileError("write failed for " + path);
}

}  // namespace

const char* motif_kind_name(MotifKind k) {
    switch (k) {
        case MotifKind::normal_activity: return "normal_activity";
        case MotifKind::phishing_funnel: return "phishing_funnel";
        case MotifKind::mimic_scam: return "mimic_scam";
    }
    return "?";
}

SynthResult generate(const SynthConfig& cfg) { return Builder(cfg).run(); }

std::uint64_t content_hash(const tx::TemporalMultigraph& g) {
    std::vector<std::string> lines;
    lines.reserve(g.num_accounts() + g.num_edges());
    for (const tx::Account& a : g.accounts())
        lines.push_back("a," + a.address + "," + tx::label_name(a.label));
    for (const tx::Transaction& t : g.edges())
        lines.push_back("e," + g.account(t.from).address + "," + g.account(t.to).address + "," +
                        tx::format_u128(t.value) + "," + std::to_string(t.timestamp) + "," +
                        std::to_string(t.block));
    std::sort(lines.begin(), lines.end());
    std::uint64_t h = fnv1a(std::to_string(lines.size()));
    for (const std::string& line : lines) {
        h = fnv1a(line, h);
        h = fnv1a("\n", 1, h);
    }
    return h;
}

void export_graph(const tx::TemporalMultigraph& g, const std::string& tx_path,
                  tx::FileFormat format, const std::string& labels_path) {
    std::string body;
    if (format == tx::FileFormat::csv) {
        body = "from,to,value,timestamp,block\n";
        for (const tx::Transaction& t : g.edges())
            body += g.account(t.from).address + "," + g.account(t.to).address + "," +
                    tx::format_u128(t.value) + "," + std::to_string(t.timestamp) + "," +
                    std::to_string(t.block) + "\n";
    } else {
        for (const tx::Transaction& t : g.edges()) {
            const nlohmann::json row = {{"from", g.account(t.from).address},
                                        {"to", g.account(t.to).address},
                                        {"value", tx::format_u128(t.value)},
                                        {"timestamp", t.timestamp},
                                        {"block", t.block}};
            body += row.dump() + "\n";
        }
    }
    write_or_throw(tx_path, body);

    std::string labels = "address,label\n";
    for (const tx::Account& a : g.accounts())
        if (a.label != tx::Label::unknown)
            labels += a.address + "," + tx::label_name(a.label) + "\n";
    write_or_throw(labels_path, labels);
}

void write_motif_log(const std::string& path, const tx::TemporalMultigraph& g,
                     const std::vector<Motif>& motifs) {
    std::string body;
    for (const Motif& m : motifs)
        for (const MotifEdge& e : m.edges) {
            const nlohmann::json row = {{"edge", e.edge},
                                        {"kind", motif_kind_name(m.kind)},
                                        {"role", e.role},
                                        {"principal", g.account(m.principal).address}};
            body += row.dump() + "\n";
        }
    write_or_throw(path, body);
}

}  // namespace ssw::synth
