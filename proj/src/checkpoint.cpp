#include "ssw/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "ssw/errors.hpp"

namespace ssw::ckpt {

namespace {

constexpr char kMagic[4] = {'S', 'S', 'C', 'K'};
constexpr std::uint16_t kVersion = 1;

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, double v) {
    const float f = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

struct Cursor {
    const std::string& buf;
    std::size_t pos = 0;
    const std::string& path;

    void need(std::size_t n) const {
        if (pos + n > buf.size()) throw DataError(path + ": truncated checkpoint");
    }
    std::uint16_t u16() {
        need(2);
        const auto* p = reinterpret_cast<const unsigned char*>(buf.data() + pos);
        pos += 2;
        return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        pos += 8;
        return v;
    }
    double f32() {
        need(4);
        std::uint32_t bits = 0;
        for (int i = 0; i < 4; ++i)
            bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
        pos += 4;
        float f;
        std::memcpy(&f, &bits, 4);
        return static_cast<double>(f);
    }
};

}  // namespace

void save_checkpoint(const std::string& path, const nlohmann::json& config,
                     const NamedTensors& tensors) {
    nlohmann::json header;
    header["version"] = kVersion;
    header["config"] = config;
    auto arr = nlohmann::json::array();
    for (const auto& [name, t] : tensors) arr.push_back({{"name", name}, {"shape", t.shape()}});
    header["tensors"] = std::move(arr);
    const std::string hj = header.dump();

    std::string out;
    out.append(kMagic, 4);
    put_u16(out, kVersion);
    put_u64(out, hj.size());
    out += hj;
    for (const auto& [name, t] : tensors)
        for (std::size_t i = 0; i < t.size(); ++i) put_f32(out, t.at(i));

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw FileError("cannot write " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw FileError("short write to " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw FileError("cannot read " + path);
    const std::string buf(std::istreambuf_iterator<char>(f), {});

    Cursor cur{buf, 0, path};
    cur.need(4);
    if (std::memcmp(buf.data(), kMagic, 4) != 0)
        throw DataError(path + ": not a checkpoint file");
    cur.pos = 4;
    const std::uint16_t version = cur.u16();
    if (version != kVersion)
        throw DataError(path + ": unsupported checkpoint version " + std::to_string(version));
    const std::uint64_t hlen = cur.u64();
    cur.need(hlen);
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(buf.substr(cur.pos, hlen));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": bad checkpoint header: " + e.what());
    }
    cur.pos += hlen;

    LoadedCheckpoint out;
    std::unordered_set<std::string> seen;
    try {
        if (header.at("version").get<std::uint64_t>() != kVersion)
            throw DataError(path + ": header/container version mismatch");
        out.config = header.at("config");
        for (const auto& entry : header.at("tensors")) {
            const std::string name = entry.at("name").get<std::string>();
            if (!seen.insert(name).second)
                throw DataError(path + ": duplicate tensor " + name);
            const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
            std::size_t numel = 1;
            for (std::size_t s : shape) {
                if (s == 0) throw DataError(path + ": zero dimension in tensor " + name);
                numel *= s;
            }
            std::vector<double> data(numel);
            for (double& v : data) v = cur.f32();
            out.tensors.emplace_back(name, nn::Tensor::from(shape, std::move(data)));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": bad checkpoint header: " + e.what());
    }
    if (cur.pos != buf.size())
        throw DataError(path + ": " + std::to_string(buf.size() - cur.pos) + " trailing bytes");
    return out;
}

void restore_into(const LoadedCheckpoint& loaded, const NamedTensors& live) {
    if (loaded.tensors.size() != live.size())
        throw DataError("checkpoint holds " + std::to_string(loaded.tensors.size()) +
                        " tensors, model needs " + std::to_string(live.size()));
    std::unordered_map<std::string, const nn::Tensor*> by_name;
    for (const auto& [name, t] : loaded.tensors) by_name[name] = &t;
    for (const auto& [name, t] : live) {
        const auto it = by_name.find(name);
        if (it == by_name.end()) throw DataError("checkpoint is missing tensor " + name);
        const nn::Tensor& src = *it->second;
        if (src.shape() != t.shape())
            throw DataError("checkpoint tensor " + name + " has shape " + src.shape_str() +
                            ", model expects " + t.shape_str());
        std::copy(src.values().begin(), src.values().end(),
                  const_cast<nn::Tensor&>(t).data());
    }
}

}  // namespace ssw::ckpt
