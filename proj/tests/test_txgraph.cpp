#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "ssw/errors.hpp"
#include "ssw/rng.hpp"
#include "ssw/txgraph.hpp"

using namespace ssw;
using namespace ssw::tx;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name, const std::string& content)
        : path("txtest_" + name) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

std::string addr(unsigned i) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "0x%040x", i);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

TemporalMultigraph random_graph(std::uint64_t seed, std::uint32_t n_nodes, std::uint32_t n_edges) {
    Rng rng(seed);
    TemporalMultigraph g;
    for (std::uint32_t i = 0; i < n_nodes; ++i) g.intern(addr(i));
    for (std::uint32_t e = 0; e < n_edges; ++e) {
        const auto from = static_cast<std::uint32_t>(rng.below(n_nodes));
        auto to = static_cast<std::uint32_t>(rng.below(n_nodes));
        while (to == from) to = static_cast<std::uint32_t>(rng.below(n_nodes));
        g.add_edge(from, to, static_cast<u128>(rng.below(1'000'000)) * 1'000'000'000ULL,
                   rng.below(10'000), rng.below(100));
    }
    g.finalize();
    return g;
}

}  // namespace

TEST_CASE("u128 value round trip and conversions") {
    CHECK(format_u128(parse_u128("0")) == "0");
    CHECK(format_u128(parse_u128("340282366920938463463374607431768211455")) ==
          "340282366920938463463374607431768211455");
    CHECK_THROWS_AS(parse_u128("340282366920938463463374607431768211456"), DataError);
    CHECK_THROWS_AS(parse_u128("12a4"), DataError);
    CHECK_THROWS_AS(parse_u128(""), DataError);

    CHECK(value_eth(parse_u128("1000000000000000000")) == doctest::Approx(1.0));
    CHECK(value_eth(parse_u128("2500000000000000000000")) == doctest::Approx(2500.0));
    CHECK(log_value(parse_u128("9000000000000000000")) == doctest::Approx(1.0));
    CHECK(log_value(0) == 0.0);
}

TEST_CASE("address validation") {
    CHECK(normalize_address("0xABCDEF0123456789abcdef0123456789ABCDEF01") ==
          "0xabcdef0123456789abcdef0123456789abcdef01");
    CHECK_THROWS_AS(normalize_address("abcdef0123456789abcdef0123456789abcdef01"), DataError);
    CHECK_THROWS_AS(normalize_address("0x123"), DataError);
    CHECK_THROWS_AS(normalize_address("0xzzcdef0123456789abcdef0123456789abcdef01"), DataError);
}

TEST_CASE("ingest three-row csv") {
    TempFile f("abc.csv", "from,to,value,timestamp,block\n" +
                              addr(1) + "," + addr(2) + ",1000,100,1\n" +
                              addr(2) + "," + addr(3) + ",2000,100,1\n" +
                              addr(1) + "," + addr(3) + ",3000,112,2\n");
    auto res = ingest(f.path, FileFormat::csv);
    CHECK(res.summary.nodes == 3);
    CHECK(res.summary.edges == 3);
    CHECK(res.graph.num_accounts() == 3);
    CHECK(res.graph.num_edges() == 3);
    CHECK(res.graph.account(0).address == addr(1));
    CHECK(res.graph.edge(2).timestamp == 112);
    CHECK(res.graph.edge(2).value == 3000);
    CHECK(res.summary.labels[static_cast<int>(Label::unknown)] == 3);
}

TEST_CASE("ingest empty file") {
    TempFile f("empty.csv", "");
    auto res = ingest(f.path, FileFormat::csv);
    CHECK(res.summary.nodes == 0);
    CHECK(res.summary.edges == 0);
}

TEST_CASE("ingest rejects decreasing timestamp across blocks naming the line") {
    TempFile f("bad_ts.csv", "from,to,value,timestamp,block\n" +
                                 addr(1) + "," + addr(2) + ",1,200,5\n" +
                                 addr(2) + "," + addr(3) + ",1,150,6\n");
    CHECK_THROWS_WITH_AS(ingest(f.path, FileFormat::csv),
                         doctest::Contains((f.path + ":3").c_str()), DataError);
}

TEST_CASE("ingest rejects conflicting timestamps within one block") {
    TempFile f("bad_block.csv", "from,to,value,timestamp,block\n" +
                                    addr(1) + "," + addr(2) + ",1,200,5\n" +
                                    addr(2) + "," + addr(3) + ",1,201,5\n");
    CHECK_THROWS_WITH_AS(ingest(f.path, FileFormat::csv),
                         doctest::Contains("conflicting timestamps"), DataError);
}

TEST_CASE("ingest rejects malformed rows naming the line") {
    TempFile f("malformed.csv", "from,to,value,timestamp,block\n" +
                                    addr(1) + "," + addr(2) + ",notanumber,100,1\n");
    CHECK_THROWS_WITH_AS(ingest(f.path, FileFormat::csv), doctest::Contains("notanumber"),
                         DataError);

    TempFile g("shortrow.csv", "from,to,value,timestamp,block\n" + addr(1) + ",5\n");
    CHECK_THROWS_WITH_AS(ingest(g.path, FileFormat::csv),
                         doctest::Contains((g.path + ":2").c_str()), DataError);

    CHECK_THROWS_AS(ingest("does_not_exist.csv", FileFormat::csv), FileError);
}

TEST_CASE("self loops dropped by default, kept on request") {
    const std::string body = "from,to,value,timestamp,block\n" +
                             addr(1) + "," + addr(1) + ",1,100,1\n" +
                             addr(1) + "," + addr(2) + ",1,100,1\n";
    TempFile f("selfloop.csv", body);
    auto res = ingest(f.path, FileFormat::csv);
    CHECK(res.summary.edges == 1);
    CHECK(res.summary.dropped_self_loops == 1);

    IngestOptions opts;
    opts.allow_self_loops = true;
    auto res2 = ingest(f.path, FileFormat::csv, "", opts);
    CHECK(res2.summary.edges == 2);
}

TEST_CASE("jsonl ingest matches csv ingest") {
    TempFile c("pair.csv", "from,to,value,timestamp,block\n" +
                               addr(7) + "," + addr(8) + ",123456789012345678901,500,3\n");
    TempFile j("pair.jsonl", "{\"from\":\"" + addr(7) + "\",\"to\":\"" + addr(8) +
                                 "\",\"value\":\"123456789012345678901\",\"timestamp\":500,"
                                 "\"block\":3}\n");
    auto rc = ingest(c.path, FileFormat::csv);
    auto rj = ingest(j.path, FileFormat::jsonl);
    REQUIRE(rc.graph.num_edges() == 1);
    REQUIRE(rj.graph.num_edges() == 1);
    CHECK(rc.graph.edge(0).value == rj.graph.edge(0).value);
    CHECK(rc.graph.edge(0).timestamp == rj.graph.edge(0).timestamp);
    CHECK(rc.graph.account(0).address == rj.graph.account(0).address);

    TempFile bad("bad.jsonl", "{\"from\":\"" + addr(7) + "\"}\n");
    CHECK_THROWS_WITH_AS(ingest(bad.path, FileFormat::jsonl), doctest::Contains("missing key"),
                         DataError);
}

TEST_CASE("labels apply with conflict detection") {
    TempFile f("lab_tx.csv", "from,to,value,timestamp,block\n" +
                                 addr(1) + "," + addr(2) + ",1,100,1\n");
    TempFile lab("lab_ok.csv", "address,label\n" + addr(1) + ",phishing\n" + addr(2) + ",scam\n" +
                                   addr(99) + ",normal\n");
    auto res = ingest(f.path, FileFormat::csv, lab.path);
    CHECK(res.graph.account(0).label == Label::phishing);
    CHECK(res.graph.account(1).label == Label::scam);
    CHECK(res.summary.labels[static_cast<int>(Label::phishing)] == 1);
    CHECK(res.summary.labels[static_cast<int>(Label::scam)] == 1);

    TempFile conflict("lab_conflict.csv",
                      "address,label\n" + addr(1) + ",phishing\n" + addr(1) + ",scam\n");
    CHECK_THROWS_WITH_AS(ingest(f.path, FileFormat::csv, conflict.path),
                         doctest::Contains("already labeled"), DataError);

    TempFile dup("lab_dup.csv",
                 "address,label\n" + addr(1) + ",phishing\n" + addr(1) + ",phishing\n");
    CHECK_NOTHROW(ingest(f.path, FileFormat::csv, dup.path));

    TempFile badlab("lab_bad.csv", "address,label\n" + addr(1) + ",sybil\n");
    CHECK_THROWS_WITH_AS(ingest(f.path, FileFormat::csv, badlab.path),
                         doctest::Contains("unknown label"), DataError);
}

TEST_CASE("neighbors_in_window trivial windows") {
    TemporalMultigraph g;
    const auto a = g.intern(addr(1)), b = g.intern(addr(2)), c = g.intern(addr(3));
    g.add_edge(a, b, 10, 100, 1);
    g.add_edge(b, a, 20, 200, 2);
    g.add_edge(a, c, 30, 300, 3);
    g.finalize();

    auto full = g.neighbors_in_window(a, 0, 1'000'000, Direction::both);
    REQUIRE(full.size() == 3);
    CHECK(full[0].edge == 0);
    CHECK(full[1].edge == 1);
    CHECK(full[2].edge == 2);
    CHECK(full[0].neighbor == b);
    CHECK(full[1].neighbor == b);
    CHECK(full[2].neighbor == c);

    CHECK(g.neighbors_in_window(a, 150, 150, Direction::both).empty());
    CHECK(g.neighbors_in_window(a, 0, 1'000'000, Direction::out).size() == 2);
    CHECK(g.neighbors_in_window(a, 0, 1'000'000, Direction::in).size() == 1);
    // window is half-open: [100, 200) keeps ts=100, drops ts=200
    CHECK(g.neighbors_in_window(a, 100, 200, Direction::both).size() == 1);
    CHECK_THROWS_AS(g.neighbors_in_window(99, 0, 1, Direction::both), std::out_of_range);
    CHECK_THROWS_AS(g.neighbors_in_window(a, 5, 1, Direction::both), std::invalid_argument);
}

TEST_CASE("neighbors_in_window ties order by edge id") {
    TemporalMultigraph g;
    const auto a = g.intern(addr(1)), b = g.intern(addr(2));
    g.add_edge(a, b, 1, 100, 1);
    g.add_edge(b, a, 2, 100, 1);
    g.add_edge(a, b, 3, 100, 1);
    g.finalize();
    auto hits = g.neighbors_in_window(a, 100, 101, Direction::both);
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].edge == 0);
    CHECK(hits[1].edge == 1);
    CHECK(hits[2].edge == 2);
}

TEST_CASE("neighbors_in_window equals brute force on random graph") {
    auto g = random_graph(991, 200, 2000);
    Rng rng(1717);
    for (int q = 0; q < 1000; ++q) {
        const auto v = static_cast<std::uint32_t>(rng.below(200));
        std::uint64_t t_lo = rng.below(11'000), t_hi = rng.below(11'000);
        if (t_lo > t_hi) std::swap(t_lo, t_hi);
        const auto dir = static_cast<Direction>(rng.below(3));

        auto got = g.neighbors_in_window(v, t_lo, t_hi, dir);

        std::vector<NeighborHit> want;
        for (std::uint32_t e = 0; e < g.num_edges(); ++e) {
            const auto& tx = g.edge(e);
            if (tx.timestamp < t_lo || tx.timestamp >= t_hi) continue;
            const bool out_hit = tx.from == v && (dir == Direction::out || dir == Direction::both);
            const bool in_hit = tx.to == v && (dir == Direction::in || dir == Direction::both);
            if (out_hit) want.push_back({tx.to, e, tx.timestamp, tx.value});
            else if (in_hit) want.push_back({tx.from, e, tx.timestamp, tx.value});
        }
        std::sort(want.begin(), want.end(), [](const NeighborHit& x, const NeighborHit& y) {
            if (x.timestamp != y.timestamp) return x.timestamp < y.timestamp;
            return x.edge < y.edge;
        });

        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].neighbor == want[i].neighbor);
            CHECK(got[i].edge == want[i].edge);
            CHECK(got[i].timestamp == want[i].timestamp);
            CHECK(got[i].value == want[i].value);
        }
    }
}

TEST_CASE("full-range both-direction scan enumerates every edge exactly twice") {
    auto g = random_graph(55, 60, 400);
    std::vector<int> counts(g.num_edges(), 0);
    for (std::uint32_t v = 0; v < g.num_accounts(); ++v)
        for (const auto& hit : g.neighbors_in_window(v, 0, ~0ULL, Direction::both))
            ++counts[hit.edge];
    for (int c : counts) CHECK(c == 2);
}

TEST_CASE("degree_stats examples") {
    TemporalMultigraph star;
    const auto hub = star.intern(addr(0));
    for (unsigned i = 1; i <= 50; ++i) star.add_edge(star.intern(addr(i)), hub, 1, i, i);
    star.finalize();
    auto st = degree_stats(star);
    CHECK(st.histogram.at(50) == 1);
    CHECK(st.histogram.at(1) == 50);

    TemporalMultigraph chain;
    const auto a = chain.intern(addr(1)), b = chain.intern(addr(2)), c = chain.intern(addr(3));
    chain.add_edge(a, b, 1, 1, 1);
    chain.add_edge(b, c, 1, 2, 2);
    chain.finalize();
    auto cs = degree_stats(chain);
    CHECK(cs.histogram.at(1) == 2);
    CHECK(cs.histogram.at(2) == 1);

    TemporalMultigraph empty;
    CHECK_THROWS_AS(degree_stats(empty), DataError);
    TemporalMultigraph isolated;
    isolated.intern(addr(1));
    CHECK_THROWS_AS(degree_stats(isolated), DataError);
}

TEST_CASE("graph serialization round trips exactly") {
    auto g = random_graph(333, 80, 600);
    g.set_label(3, Label::phishing);
    g.set_label(7, Label::scam);
    g.set_label(9, Label::normal);

    TempFile f1("rt1.ssgr", "");
    save_graph(g, f1.path);
    auto g2 = load_graph(f1.path);

    REQUIRE(g2.num_accounts() == g.num_accounts());
    REQUIRE(g2.num_edges() == g.num_edges());
    for (std::uint32_t i = 0; i < g.num_accounts(); ++i) {
        CHECK(g2.account(i).address == g.account(i).address);
        CHECK(g2.account(i).label == g.account(i).label);
        CHECK(g2.out_adj(i) == g.out_adj(i));
        CHECK(g2.in_adj(i) == g.in_adj(i));
    }
    for (std::uint32_t e = 0; e < g.num_edges(); ++e) {
        CHECK(g2.edge(e).from == g.edge(e).from);
        CHECK(g2.edge(e).to == g.edge(e).to);
        CHECK(g2.edge(e).value == g.edge(e).value);
        CHECK(g2.edge(e).timestamp == g.edge(e).timestamp);
        CHECK(g2.edge(e).block == g.edge(e).block);
    }

    // save(load(save(g))) is byte-identical
    TempFile f2("rt2.ssgr", "");
    save_graph(g2, f2.path);
    CHECK(read_file(f1.path) == read_file(f2.path));
}

TEST_CASE("graph loader rejects corrupt files") {
    TempFile bad("bad.ssgr", "NOPE");
    CHECK_THROWS_WITH_AS(load_graph(bad.path), doctest::Contains("bad magic"), DataError);

    auto g = random_graph(1, 5, 10);
    TempFile f("trunc.ssgr", "");
    save_graph(g, f.path);
    std::string bytes = read_file(f.path);
    TempFile cut("cut.ssgr", bytes.substr(0, bytes.size() - 7));
    CHECK_THROWS_WITH_AS(load_graph(cut.path), doctest::Contains("truncated"), DataError);

    TempFile extra("extra.ssgr", bytes + "xx");
    CHECK_THROWS_WITH_AS(load_graph(extra.path), doctest::Contains("trailing"), DataError);

    std::string vbad = bytes;
    vbad[4] = 9;  // version field
    TempFile vf("vbad.ssgr", vbad);
    CHECK_THROWS_WITH_AS(load_graph(vf.path), doctest::Contains("unsupported graph version"),
                         DataError);
}
