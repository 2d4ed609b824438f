#include <fstream>

#include "json.hpp"
#include "ssw/errors.hpp"
#include "ssw/strwalk.hpp"

namespace ssw::walk {

namespace {

nlohmann::json seq_to_json(const SubgraphSequence& seq) {
    nlohmann::json j;
    j["start"] = seq.start;
    auto& ivs = j["intervals"] = nlohmann::json::array();
    for (const auto& iv : seq.intervals) ivs.push_back({iv.t_lo, iv.t_hi});
    auto& sgs = j["subgraphs"] = nlohmann::json::array();
    for (const auto& sg : seq.subgraphs) {
        nlohmann::json js;
        js["anchor"] = sg.anchor;
        js["nodes"] = sg.nodes;
        auto& edges = js["edges"] = nlohmann::json::array();
        for (const auto& e : sg.edges)
            edges.push_back({e.from, e.to, tx::format_u128(e.value), e.timestamp});
        sgs.push_back(std::move(js));
    }
    return j;
}

SubgraphSequence seq_from_json(const nlohmann::json& j, const std::string& where) {
    try {
        SubgraphSequence seq;
        seq.start = j.at("start").get<std::uint32_t>();
        for (const auto& iv : j.at("intervals"))
            seq.intervals.push_back({iv.at(0).get<std::uint64_t>(), iv.at(1).get<std::uint64_t>()});
        for (const auto& js : j.at("subgraphs")) {
            Subgraph sg;
            sg.anchor = js.at("anchor").get<std::uint32_t>();
            sg.nodes = js.at("nodes").get<std::vector<std::uint32_t>>();
            for (const auto& je : js.at("edges")) {
                SubEdge e;
                e.from = je.at(0).get<std::uint32_t>();
                e.to = je.at(1).get<std::uint32_t>();
                e.value = tx::parse_u128(je.at(2).get<std::string>());
                e.timestamp = je.at(3).get<std::uint64_t>();
                sg.edges.push_back(e);
            }
            seq.subgraphs.push_back(std::move(sg));
        }
        if (seq.intervals.size() != seq.subgraphs.size())
            throw DataError(where + ": intervals and subgraphs differ in length");
        return seq;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(where + ": malformed walk record: " + e.what());
    }
}

}  // namespace

void save_walk_cache(const std::string& path, const WalkConfig& cfg,
                     const std::vector<SubgraphSequence>& seqs) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError("cannot open " + path + " for writing");
    nlohmann::json header;
    header["config_hash"] = config_hash(cfg);
    header["sequences"] = seqs.size();
    out << header.dump() << '\n';
    for (const auto& seq : seqs) out << seq_to_json(seq).dump() << '\n';
    if (!out) throw FileError("short write to " + path);
}

std::optional<std::vector<SubgraphSequence>> load_walk_cache(const std::string& path,
                                                             const WalkConfig& cfg) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;  // no cache yet
    std::string line;
    if (!std::getline(in, line)) return std::nullopt;
    nlohmann::json header = nlohmann::json::parse(line, nullptr, false);
    if (header.is_discarded() || !header.is_object() || !header.contains("config_hash"))
        throw DataError(path + ":1: walk cache header missing config_hash");
    if (header["config_hash"].get<std::string>() != config_hash(cfg)) return std::nullopt;

    std::vector<SubgraphSequence> seqs;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(lineno);
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw DataError(where + ": invalid JSON");
        seqs.push_back(seq_from_json(j, where));
    }
    return seqs;
}

std::vector<SubgraphSequence> cache_or_sample(const tx::TemporalMultigraph& g,
                                              const std::vector<std::uint32_t>& starts,
                                              const WalkConfig& cfg, std::size_t walks_per_node,
                                              const std::string& cache_path) {
    if (auto cached = load_walk_cache(cache_path, cfg)) return std::move(*cached);
    auto seqs = sample_dataset(g, starts, cfg, walks_per_node);
    save_walk_cache(cache_path, cfg, seqs);
    return seqs;
}

}  // namespace ssw::walk
