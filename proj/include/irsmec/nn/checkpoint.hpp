#ifndef IRSMEC_NN_CHECKPOINT_HPP
#define IRSMEC_NN_CHECKPOINT_HPP

#include <bit>
#include <cstdint>
#include <fstream>
#include <json.hpp>

#include "irsmec/nn/tensor.hpp"

namespace irsmec::nn {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

/// Saves every registry entry as a raw little-endian float32 array in
/// <stem>.bin, with names, shapes and offsets in the <stem>.json manifest.
template <class S>
void save_checkpoint(const std::string& stem, const ParamRegistry<S>& reg,
                     const nlohmann::json& meta) {
    nlohmann::json manifest;
    manifest["format"] = "irsmec-checkpoint";
    manifest["version"] = 1;
    manifest["meta"] = meta;
    nlohmann::json arrays = nlohmann::json::array();

    std::ofstream bin(stem + ".bin", std::ios::binary | std::ios::trunc);
    if (!bin) throw std::runtime_error("cannot write checkpoint '" + stem + ".bin'");
    std::uint64_t offset = 0;
    std::vector<float> buf;
    for (const auto& r : reg) {
        const auto count = static_cast<std::uint64_t>(r.value->size());
        buf.resize(count);
        // Eigen storage is column-major; the manifest shape is semantic only,
        // round-tripping relies on identical storage order on load.
        for (std::uint64_t i = 0; i < count; ++i)
            buf[i] = static_cast<float>(r.value->data()[i]);
        bin.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(count * sizeof(float)));
        arrays.push_back({{"name", r.name},
                          {"shape", r.shape},
                          {"dtype", "f32"},
                          {"offset", offset},
                          {"count", count}});
        offset += count * sizeof(float);
    }
    manifest["arrays"] = arrays;
    if (!bin) throw std::runtime_error("short write on '" + stem + ".bin'");
    bin.close();

    std::ofstream js(stem + ".json", std::ios::trunc);
    if (!js) throw std::runtime_error("cannot write checkpoint '" + stem + ".json'");
    js << manifest.dump(2) << "\n";
}

/// Fills the registry from a checkpoint; every registry entry must be
/// present with a matching element count. Returns the manifest meta block.
template <class S>
nlohmann::json load_checkpoint(const std::string& stem, const ParamRegistry<S>& reg) {
    std::ifstream js(stem + ".json");
    if (!js) throw std::runtime_error("cannot open checkpoint '" + stem + ".json'");
    nlohmann::json manifest = nlohmann::json::parse(js);
    if (manifest.value("format", "") != "irsmec-checkpoint")
        throw std::runtime_error("'" + stem + ".json' is not a checkpoint manifest");

    struct Entry {
        std::uint64_t offset, count;
    };
    std::map<std::string, Entry> index;
    for (const auto& a : manifest["arrays"])
        index[a["name"].get<std::string>()] = {a["offset"].get<std::uint64_t>(),
                                               a["count"].get<std::uint64_t>()};

    std::ifstream bin(stem + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("cannot open checkpoint '" + stem + ".bin'");
    std::vector<float> buf;
    for (const auto& r : reg) {
        auto it = index.find(r.name);
        if (it == index.end())
            throw std::runtime_error("checkpoint missing array '" + r.name + "'");
        if (it->second.count != static_cast<std::uint64_t>(r.value->size()))
            throw std::runtime_error("checkpoint array '" + r.name + "' has wrong size");
        buf.resize(it->second.count);
        bin.seekg(static_cast<std::streamoff>(it->second.offset));
        bin.read(reinterpret_cast<char*>(buf.data()),
                 static_cast<std::streamsize>(it->second.count * sizeof(float)));
        if (!bin) throw std::runtime_error("short read in '" + stem + ".bin'");
        for (std::uint64_t i = 0; i < it->second.count; ++i)
            r.value->data()[i] = static_cast<S>(buf[i]);
    }
    return manifest["meta"];
}

}  // namespace irsmec::nn

#endif
