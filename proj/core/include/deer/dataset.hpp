#pragma once

#include <map>
#include <string>
#include <vector>

#include "deer/config.hpp"
#include "deer/metrics.hpp"

namespace deer {

struct ManifestEntry {
    uint64_t seed = 0;
    std::string phantom_file;
    std::string sino_file;
};

struct Manifest {
    int n = 0, nv_few = 0, nv_dense = 0, n_det = 0;
    std::string phantom_kind;
    uint64_t seed = 0;
    std::map<std::string, std::vector<ManifestEntry>> splits;  // train/val/test
};

/// Phantom seed for a split index; the per-split offsets keep the seed
/// ranges disjoint.
uint64_t phantom_seed_for(uint64_t base_seed, const std::string& split, int index);

/// Deterministically generate phantom + few-view sinogram files for all
/// three splits under cfg.data_dir, plus manifest.json and the resolved
/// config. Refuses a non-empty directory unless force is set.
Manifest generate_dataset(const ExperimentConfig& cfg, bool force);

Manifest load_manifest(const std::string& dir);

/// Byte hash of manifest.json (reruns with the same config must match).
uint64_t dataset_manifest_hash(const std::string& dir);

/// Load one split into memory; with_products additionally runs the
/// few-view FBP / reprojection / filtering pipeline per sample.
/// limit > 0 loads only the first `limit` entries.
std::vector<TestSample> load_split(const std::string& dir, const Manifest& manifest,
                                   const std::string& split, const ExperimentConfig& cfg,
                                   bool with_products, int limit = 0);

/// Check that a manifest's geometry matches the experiment config.
void require_geometry_match(const Manifest& m, const ExperimentConfig& cfg);

}  // namespace deer
