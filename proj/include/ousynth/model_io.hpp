#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ousynth/apt_model.hpp"
#include "ousynth/market_pipeline.hpp"

namespace ousynth {

// Versioned JSON persistence. Numbers are serialized with shortest
// round-trip decimals, so load(save(m)) == m exactly. Loaders validate the
// schema_version and re-check type invariants (sigma symmetry/PSD,
// dimension consistency) before returning.

void save_market_model(const MarketModel& model, const std::filesystem::path& path);
MarketModel load_market_model(const std::filesystem::path& path);

struct AptModelFile {
    std::vector<std::string> factor_ids;  // market id first
    std::vector<AptCoefficients> stocks;
};

void save_apt_model(const AptModelFile& model, const std::filesystem::path& path);
AptModelFile load_apt_model(const std::filesystem::path& path);

// Reproducibility record written next to every generation run's outputs.
// Timestamps live only here, keeping the data outputs byte-stable.
struct RunManifest {
    std::string command;
    uint64_t seed = 0;
    int steps = 0;
    int traces = 0;
    std::string noise_mode;
    std::vector<std::pair<std::string, uint64_t>> inputs;  // path, fnv1a64
    std::string created_utc;
    std::string tool_version;
};

void write_manifest(RunManifest manifest, const std::filesystem::path& path);

/// FNV-1a 64-bit content fingerprint (reproducibility bookkeeping, not a
/// cryptographic hash).
uint64_t fnv1a64_file(const std::filesystem::path& path);
uint64_t fnv1a64(const void* data, size_t size);

/// Write-to-temp + atomic rename; error paths never leave partial files.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace ousynth
