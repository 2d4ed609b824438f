#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "ssw/errors.hpp"
#include "ssw/strwalk.hpp"
#include "ssw/txgraph.hpp"
#include "testutil.hpp"

using namespace ssw;
using namespace ssw::walk;

namespace {

std::string addr(unsigned i) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "0x%040x", i);
    return buf;
}

constexpr tx::u128 kEth = 1'000'000'000'000'000'000ULL;

// star with future edges X -> N_i at given offsets from t=1000
tx::TemporalMultigraph star_graph(const std::vector<std::uint64_t>& deltas) {
    tx::TemporalMultigraph g;
    const auto x = g.intern(addr(0));
    for (std::size_t i = 0; i < deltas.size(); ++i)
        g.add_edge(x, g.intern(addr(static_cast<unsigned>(i + 1))), kEth, 1000 + deltas[i],
                   deltas[i]);
    g.finalize();
    return g;
}

tx::TemporalMultigraph chain_graph() {
    tx::TemporalMultigraph g;
    const auto a = g.intern(addr(1)), b = g.intern(addr(2)), c = g.intern(addr(3)),
               d = g.intern(addr(4));
    g.add_edge(a, b, kEth, 0, 1);
    g.add_edge(b, c, kEth, 100, 2);
    g.add_edge(c, d, kEth, 200, 3);
    g.finalize();
    return g;
}

bool seq_equal(const SubgraphSequence& a, const SubgraphSequence& b) {
    if (a.start != b.start || a.subgraphs.size() != b.subgraphs.size()) return false;
    for (std::size_t i = 0; i < a.subgraphs.size(); ++i) {
        const auto& x = a.subgraphs[i];
        const auto& y = b.subgraphs[i];
        if (a.intervals[i].t_lo != b.intervals[i].t_lo) return false;
        if (a.intervals[i].t_hi != b.intervals[i].t_hi) return false;
        if (x.anchor != y.anchor || x.nodes != y.nodes || x.edges.size() != y.edges.size())
            return false;
        for (std::size_t e = 0; e < x.edges.size(); ++e)
            if (x.edges[e].from != y.edges[e].from || x.edges[e].to != y.edges[e].to ||
                x.edges[e].value != y.edges[e].value ||
                x.edges[e].timestamp != y.edges[e].timestamp)
                return false;
    }
    return true;
}

void check_invariants(const tx::TemporalMultigraph& g, const SubgraphSequence& seq,
                      const WalkConfig& cfg) {
    REQUIRE(seq.subgraphs.size() == seq.intervals.size());
    CHECK(seq.subgraphs.size() <= cfg.max_intervals);
    for (std::size_t i = 0; i < seq.subgraphs.size(); ++i) {
        const auto& sg = seq.subgraphs[i];
        const auto& iv = seq.intervals[i];
        CHECK(sg.nodes.size() <= cfg.structural_window + 1);
        REQUIRE(!sg.nodes.empty());
        CHECK(sg.nodes.front() == sg.anchor);
        CHECK(!sg.edges.empty());  // run_walk never emits empty intervals
        for (const auto& e : sg.edges) {
            CHECK(e.timestamp >= iv.t_lo);
            CHECK(e.timestamp < iv.t_hi);
            CHECK((e.from == sg.anchor || e.to == sg.anchor));
        }
        if (i > 0) CHECK(seq.intervals[i - 1].t_hi <= iv.t_lo);
        if (i > 0)
            for (const auto& e : seq.subgraphs[i - 1].edges) CHECK(e.timestamp < iv.t_lo);
    }
    (void)g;
}

tx::TemporalMultigraph random_activity_graph(std::uint64_t seed, unsigned n_nodes,
                                             unsigned n_edges) {
    Rng rng(seed);
    tx::TemporalMultigraph g;
    for (unsigned i = 0; i < n_nodes; ++i) g.intern(addr(i));
    std::uint64_t block = 1, ts = 10'000;
    for (unsigned e = 0; e < n_edges; ++e) {
        const auto from = static_cast<std::uint32_t>(rng.below(n_nodes));
        auto to = static_cast<std::uint32_t>(rng.below(n_nodes));
        while (to == from) to = static_cast<std::uint32_t>(rng.below(n_nodes));
        if (rng.bernoulli(0.7)) {
            ++block;
            ts += rng.below(900) + 1;
        }
        g.add_edge(from, to, kEth * (1 + rng.below(100)), ts, block);
    }
    g.finalize();
    return g;
}

}  // namespace

TEST_CASE("temporal_step with a single candidate always takes it") {
    auto g = star_graph({50});
    WalkConfig cfg;
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        auto step = temporal_step(g, 0, 1000, cfg, rng);
        REQUIRE(step.has_value());
        CHECK(step->next_node == 1);
        CHECK(step->edge == 0);
    }
}

TEST_CASE("temporal_step returns none without forward candidates") {
    auto g = star_graph({50});
    WalkConfig cfg;
    Rng rng(1);
    CHECK(!temporal_step(g, 0, 2000, cfg, rng).has_value());  // everything is in the past
    CHECK(!temporal_step(g, 1, 0, cfg, rng).has_value());     // leaf has no out edges
}

TEST_CASE("temporal_step equal timestamps split 50/50") {
    auto g = star_graph({25, 25});
    WalkConfig cfg;
    cfg.tau = 10.0;
    Rng rng(42);
    int first = 0;
    const int draws = 100'000;
    for (int i = 0; i < draws; ++i)
        if (temporal_step(g, 0, 1000, cfg, rng)->edge == 0) ++first;
    CHECK(std::fabs(first / static_cast<double>(draws) - 0.5) < 0.01);
}

TEST_CASE("temporal_step frequencies match the closed-form softmax") {
    // deltas {0,10,20} at tau=10 -> softmax(0,-1,-2), frozen oracle values
    const double expected[3] = {0.66524096, 0.24472847, 0.09003057};
    auto g = star_graph({0, 10, 20});
    WalkConfig cfg;
    cfg.tau = 10.0;
    Rng rng(7);
    const int draws = 100'000;
    int counts[3] = {0, 0, 0};
    for (int i = 0; i < draws; ++i) ++counts[temporal_step(g, 0, 1000, cfg, rng)->edge];
    double l1 = 0.0;
    for (int j = 0; j < 3; ++j) l1 += std::fabs(counts[j] / static_cast<double>(draws) - expected[j]);
    CHECK(l1 < 0.01);
}

TEST_CASE("temporal_step passes chi-square goodness of fit on 5 candidates") {
    const std::vector<std::uint64_t> deltas = {0, 5, 10, 15, 20};
    auto g = star_graph(deltas);
    WalkConfig cfg;
    cfg.tau = 10.0;
    // expected distribution computed directly from the definition
    double e[5], total = 0.0;
    for (int j = 0; j < 5; ++j) {
        e[j] = std::exp(-static_cast<double>(deltas[static_cast<std::size_t>(j)]) / 10.0);
        total += e[j];
    }
    const int draws = 100'000;
    int counts[5] = {0};
    Rng rng(99);
    for (int i = 0; i < draws; ++i) ++counts[temporal_step(g, 0, 1000, cfg, rng)->edge];
    double chi2 = 0.0;
    for (int j = 0; j < 5; ++j) {
        const double expect = draws * e[j] / total;
        chi2 += (counts[j] - expect) * (counts[j] - expect) / expect;
    }
    CHECK(sswtest::chi2_pvalue_even(chi2, 4) > 0.01);
}

TEST_CASE("structural_step includes everything when the window is wide") {
    auto g = star_graph({1, 2, 3});
    WalkConfig cfg;
    cfg.structural_window = 10;
    Rng rng(5);
    auto sg = structural_step(g, 0, {0, 10'000}, cfg, rng);
    CHECK(sg.anchor == 0);
    CHECK(sg.nodes.size() == 4);
    CHECK(sg.edges.size() == 3);
    CHECK(sg.edges[0].timestamp == 1001);
    CHECK(sg.edges[1].timestamp == 1002);
    CHECK(sg.edges[2].timestamp == 1003);
}

TEST_CASE("structural_step with no in-interval edges is a singleton") {
    auto g = star_graph({1, 2, 3});
    WalkConfig cfg;
    Rng rng(5);
    auto sg = structural_step(g, 0, {2000, 3000}, cfg, rng);
    CHECK(sg.nodes == std::vector<std::uint32_t>{0});
    CHECK(sg.edges.empty());
}

TEST_CASE("structural_step marginals are uniform for equal values") {
    std::vector<std::uint64_t> deltas(20);
    for (std::size_t i = 0; i < 20; ++i) deltas[i] = i;
    auto g = star_graph(deltas);
    WalkConfig cfg;
    cfg.structural_window = 5;
    Rng rng(1234);
    const int runs = 50'000;
    std::vector<int> included(20, 0);
    for (int r = 0; r < runs; ++r) {
        auto sg = structural_step(g, 0, {0, 10'000}, cfg, rng);
        REQUIRE(sg.edges.size() == 5);
        CHECK(sg.nodes.size() <= 6);
        for (const auto& e : sg.edges) ++included[e.timestamp - 1000];
    }
    for (int c : included)
        CHECK(std::fabs(c / static_cast<double>(runs) - 0.25) < 0.02);
}

TEST_CASE("structural_step favors high-value edges") {
    tx::TemporalMultigraph g;
    const auto x = g.intern(addr(0));
    g.add_edge(x, g.intern(addr(1)), 99 * kEth, 1000, 1);
    g.add_edge(x, g.intern(addr(2)), 0, 1000, 1);
    g.finalize();
    WalkConfig cfg;
    cfg.structural_window = 1;
    Rng rng(5);
    int big = 0;
    const int runs = 20'000;
    for (int r = 0; r < runs; ++r) {
        auto sg = structural_step(g, 0, {0, 10'000}, cfg, rng);
        REQUIRE(sg.edges.size() == 1);
        if (sg.edges[0].to == 1) ++big;
    }
    // weights 1+99 vs 1+0 -> p(big) = 100/101
    CHECK(std::fabs(big / static_cast<double>(runs) - 100.0 / 101.0) < 0.01);
}

TEST_CASE("run_walk on an isolated node yields an empty sequence") {
    tx::TemporalMultigraph g;
    g.intern(addr(1));
    g.intern(addr(2));
    g.add_edge(1, 0, kEth, 5, 1);
    const auto iso = g.intern(addr(3));
    g.finalize();
    WalkConfig cfg;
    auto seq = run_walk(g, iso, cfg);
    CHECK(seq.start == iso);
    CHECK(seq.subgraphs.empty());

    CHECK_THROWS_AS(run_walk(g, 99, cfg), std::out_of_range);
}

TEST_CASE("run_walk hand trace: chain A->B->C->D anchors A,B,C") {
    auto g = chain_graph();
    WalkConfig cfg;
    cfg.interval_width = 100;
    cfg.structural_window = 5;
    cfg.direction = tx::Direction::out;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        cfg.seed = seed;
        auto seq = run_walk(g, 0, cfg);
        REQUIRE(seq.subgraphs.size() == 3);
        CHECK(seq.subgraphs[0].anchor == 0);
        CHECK(seq.subgraphs[1].anchor == 1);
        CHECK(seq.subgraphs[2].anchor == 2);
        CHECK(seq.intervals[0].t_lo == 0);
        CHECK(seq.intervals[0].t_hi == 100);
        CHECK(seq.intervals[1].t_lo == 100);
        CHECK(seq.intervals[2].t_lo == 200);
        CHECK(seq.subgraphs[0].edges.size() == 1);
        CHECK(seq.subgraphs[0].edges[0].to == 1);
        check_invariants(g, seq, cfg);
    }
}

TEST_CASE("run_walk is deterministic for a fixed seed") {
    auto g = random_activity_graph(8, 50, 600);
    WalkConfig cfg;
    cfg.interval_width = 1000;
    cfg.seed = 77;
    cfg.direction = tx::Direction::both;
    auto s1 = run_walk(g, 3, cfg);
    auto s2 = run_walk(g, 3, cfg);
    CHECK(seq_equal(s1, s2));

    // a hub with 20 interchangeable edges: different seeds must diverge
    std::vector<std::uint64_t> deltas(20);
    for (std::size_t i = 0; i < 20; ++i) deltas[i] = i;
    auto bushy = star_graph(deltas);
    WalkConfig bcfg;
    bcfg.structural_window = 5;
    bcfg.interval_width = 10'000;
    bcfg.seed = 77;
    auto b1 = run_walk(bushy, 0, bcfg);
    bcfg.seed = 78;
    auto b2 = run_walk(bushy, 0, bcfg);
    CHECK(!seq_equal(b1, b2));
}

TEST_CASE("run_walk output satisfies all sequence invariants on a random graph") {
    auto g = random_activity_graph(44, 80, 1200);
    WalkConfig cfg;
    cfg.interval_width = 2000;
    cfg.structural_window = 4;
    cfg.max_intervals = 6;
    cfg.max_walk_len = 30;
    cfg.direction = tx::Direction::both;
    for (std::uint32_t v = 0; v < 80; ++v) {
        cfg.seed = 1000 + v;
        auto seq = run_walk(g, v, cfg);
        check_invariants(g, seq, cfg);
    }
}

TEST_CASE("sample_dataset basic shapes and independence") {
    std::vector<std::uint64_t> deltas(20);
    for (std::size_t i = 0; i < 20; ++i) deltas[i] = i;
    auto bushy = star_graph(deltas);
    WalkConfig bcfg;
    bcfg.structural_window = 5;
    bcfg.interval_width = 10'000;
    bcfg.seed = 5;
    auto seqs = sample_dataset(bushy, {0}, bcfg, 3);
    REQUIRE(seqs.size() == 3);
    // walks from one node use distinct derived streams
    CHECK(!seq_equal(seqs[0], seqs[1]));
    CHECK(!seq_equal(seqs[1], seqs[2]));

    auto g = random_activity_graph(21, 40, 500);
    WalkConfig cfg;
    cfg.interval_width = 1500;
    cfg.seed = 5;
    cfg.direction = tx::Direction::both;

    CHECK(sample_dataset(g, {7}, cfg, 0).empty());
    CHECK_THROWS_AS(sample_dataset(g, {}, cfg, 3), DataError);

    std::vector<std::uint32_t> starts;
    for (std::uint32_t v = 0; v < 40; ++v) starts.push_back(v);
    auto all = sample_dataset(g, starts, cfg, 2);
    REQUIRE(all.size() == 80);
    for (const auto& seq : all) check_invariants(g, seq, cfg);

    // deterministic as a whole
    auto again = sample_dataset(g, starts, cfg, 2);
    for (std::size_t i = 0; i < all.size(); ++i) CHECK(seq_equal(all[i], again[i]));
}

TEST_CASE("walk cache round trips and invalidates on config change") {
    auto g = random_activity_graph(3, 30, 400);
    WalkConfig cfg;
    cfg.interval_width = 1200;
    cfg.seed = 11;
    cfg.direction = tx::Direction::both;
    std::vector<std::uint32_t> starts = {1, 2, 3};

    const std::string path = "walks_test.jsonl";
    std::remove(path.c_str());

    auto seqs = sample_dataset(g, starts, cfg, 2);
    save_walk_cache(path, cfg, seqs);

    auto loaded = load_walk_cache(path, cfg);
    REQUIRE(loaded.has_value());
    REQUIRE(loaded->size() == seqs.size());
    for (std::size_t i = 0; i < seqs.size(); ++i) CHECK(seq_equal(seqs[i], (*loaded)[i]));

    WalkConfig other = cfg;
    other.structural_window += 1;
    CHECK(!load_walk_cache(path, other).has_value());
    CHECK(!load_walk_cache("no_such_cache.jsonl", cfg).has_value());

    // cache_or_sample reuses the file rather than resampling
    auto via_cache = cache_or_sample(g, starts, cfg, 2, path);
    REQUIRE(via_cache.size() == seqs.size());
    for (std::size_t i = 0; i < seqs.size(); ++i) CHECK(seq_equal(seqs[i], via_cache[i]));

    // corrupt record -> loud failure, not silent fallback
    {
        std::ofstream out(path, std::ios::app);
        out << "{\"start\": \"zap\"}\n";
    }
    CHECK_THROWS_AS(load_walk_cache(path, cfg), DataError);
    std::remove(path.c_str());
}

TEST_CASE("config hash covers every field") {
    WalkConfig base;
    const std::string h0 = config_hash(base);
    WalkConfig c = base;
    c.max_walk_len += 1;
    CHECK(config_hash(c) != h0);
    c = base;
    c.structural_window += 1;
    CHECK(config_hash(c) != h0);
    c = base;
    c.interval_width += 1;
    CHECK(config_hash(c) != h0);
    c = base;
    c.tau = 3.5;
    CHECK(config_hash(c) != h0);
    c = base;
    c.max_intervals += 1;
    CHECK(config_hash(c) != h0);
    c = base;
    c.seed += 1;
    CHECK(config_hash(c) != h0);
    c = base;
    c.direction = tx::Direction::both;
    CHECK(config_hash(c) != h0);
}

TEST_CASE("default tau is the mean inter-event gap") {
    auto g = chain_graph();  // timestamps 0,100,200 -> mean gap 100
    CHECK(default_tau(g) == doctest::Approx(100.0));
    WalkConfig cfg;
    CHECK(effective_tau(g, cfg) == doctest::Approx(100.0));
    cfg.tau = 7.0;
    CHECK(effective_tau(g, cfg) == doctest::Approx(7.0));
}
