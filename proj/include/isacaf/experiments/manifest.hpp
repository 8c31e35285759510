// SPDX-License-Identifier: Apache-2.0
//
// isacaf - ambiguity function and ranging simulation of OFDM ISAC signals
// under power-amplifier clipping.

#pragma once

// Run manifest: config snapshot, seed, version, timing and output checksums.

#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "isacaf/experiments/config.hpp"
#include "isacaf/version.hpp"

namespace isacaf::experiments {

inline std::string sha256_hex(const std::string& data)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw NumericError("sha256: digest failed");
    std::string hex;
    char b[3];
    for (unsigned i = 0; i < len; ++i) {
        std::snprintf(b, sizeof b, "%02x", md[i]);
        hex += b;
    }
    return hex;
}

inline std::string read_file(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read '" + path + "'");
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

struct OutputFile {
    std::string name;  // relative to the output directory
    std::string sha256;
    std::size_t bytes = 0;
};

struct RunManifest {
    std::string scenario;
    std::string figure;
    json config;
    std::uint64_t seed = 0;
    std::string version = kVersion;
    double wall_clock_s = 0.0;
    unsigned workers = 1;
    std::vector<OutputFile> files;

    json to_json() const
    {
        json j{{"scenario", scenario}, {"figure", figure},   {"config", config},  {"seed", seed},
               {"version", version},   {"wall_clock_s", wall_clock_s}, {"workers", workers}};
        j["files"] = json::array();
        for (const auto& f : files) j["files"].push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
        return j;
    }
};

} // namespace isacaf::experiments
