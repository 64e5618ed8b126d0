#include "deer/dataset.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "deer/phantom.hpp"
#include "deer/raster_io.hpp"

namespace deer {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr uint64_t kValOffset = 1000000;
constexpr uint64_t kTestOffset = 2000000;

std::string sample_name(const char* prefix, int i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_%06d.drst", prefix, i);
    return buf;
}

PhantomSpec spec_for(const ExperimentConfig& cfg, uint64_t seed) {
    if (phantom_kind_from_string(cfg.phantom_kind) == PhantomKind::SheppLogan)
        return PhantomSpec::shepp_logan();
    return PhantomSpec::random_ellipses(seed);
}

}  // namespace

uint64_t phantom_seed_for(uint64_t base_seed, const std::string& split, int index) {
    check(index >= 0, "dataset: negative sample index");
    if (split == "train") return base_seed + static_cast<uint64_t>(index);
    if (split == "val") return base_seed + kValOffset + static_cast<uint64_t>(index);
    if (split == "test") return base_seed + kTestOffset + static_cast<uint64_t>(index);
    throw std::invalid_argument("dataset: unknown split '" + split + "'");
}

Manifest generate_dataset(const ExperimentConfig& cfg, bool force) {
    ExperimentConfig c = cfg;
    c.resolve_defaults();
    c.validate();
    check(c.train_count >= 1, "gen-data: train_count must be >= 1");

    fs::path dir(c.data_dir);
    if (fs::exists(dir) && !fs::is_empty(dir))
        require(force, "gen-data: directory '", c.data_dir,
                "' exists and is not empty (use --force to overwrite)");
    fs::create_directories(dir);

    Manifest m;
    m.n = c.n;
    m.nv_few = c.nv_few;
    m.nv_dense = c.nv_dense;
    m.n_det = c.n_det;
    m.phantom_kind = c.phantom_kind;
    m.seed = c.seed;

    const std::vector<std::pair<std::string, int>> split_counts = {
        {"train", c.train_count}, {"val", c.val_count}, {"test", c.test_count}};
    const std::vector<double> angles = equispaced_angles(c.nv_few);

    for (const auto& [split, count] : split_counts) {
        fs::create_directories(dir / split);
        auto& entries = m.splits[split];
        entries.resize(static_cast<size_t>(count));
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < count; ++i) {
            const uint64_t seed = phantom_seed_for(c.seed, split, i);
            Image phantom = make_phantom(spec_for(c, seed), c.n);
            Sinogram sino = radon(phantom, angles, c.n_det, 0.0, c.radon_step_px);
            ManifestEntry e;
            e.seed = seed;
            e.phantom_file = split + "/" + sample_name("phantom", i);
            e.sino_file = split + "/" + sample_name("sino", i);
            MetaMap meta{{"phantom_seed", std::to_string(seed)},
                         {"nv_few", std::to_string(c.nv_few)},
                         {"nv_dense", std::to_string(c.nv_dense)}};
            save_image((dir / e.phantom_file).string(), phantom, meta);
            save_sinogram((dir / e.sino_file).string(), sino, meta);
            entries[static_cast<size_t>(i)] = e;
        }
    }

    json j;
    j["n"] = m.n;
    j["nv_few"] = m.nv_few;
    j["nv_dense"] = m.nv_dense;
    j["n_det"] = m.n_det;
    j["phantom_kind"] = m.phantom_kind;
    j["seed"] = m.seed;
    for (const auto& [split, entries] : m.splits) {
        json arr = json::array();
        for (const auto& e : entries)
            arr.push_back({{"seed", e.seed}, {"phantom", e.phantom_file}, {"sino", e.sino_file}});
        j["splits"][split] = arr;
    }
    std::ofstream os(dir / "manifest.json");
    require(os.good(), "gen-data: cannot write manifest");
    os << j.dump(2) << "\n";

    std::ofstream cfg_os(dir / "resolved_config.cfg");
    cfg_os << c.serialize();
    return m;
}

Manifest load_manifest(const std::string& dir) {
    std::ifstream is(fs::path(dir) / "manifest.json");
    require(is.good(), "dataset: cannot open manifest in '", dir, "'");
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error(strcat_all("dataset: corrupt manifest in '", dir, "': ", e.what()));
    }
    Manifest m;
    m.n = j.at("n").get<int>();
    m.nv_few = j.at("nv_few").get<int>();
    m.nv_dense = j.at("nv_dense").get<int>();
    m.n_det = j.at("n_det").get<int>();
    m.phantom_kind = j.at("phantom_kind").get<std::string>();
    m.seed = j.at("seed").get<uint64_t>();
    for (const auto& [split, arr] : j.at("splits").items()) {
        auto& entries = m.splits[split];
        for (const auto& e : arr)
            entries.push_back({e.at("seed").get<uint64_t>(), e.at("phantom").get<std::string>(),
                               e.at("sino").get<std::string>()});
    }
    return m;
}

uint64_t dataset_manifest_hash(const std::string& dir) {
    std::ifstream is(fs::path(dir) / "manifest.json", std::ios::binary);
    require(is.good(), "dataset: cannot open manifest in '", dir, "'");
    std::ostringstream os;
    os << is.rdbuf();
    return fnv1a64(os.str());
}

std::vector<TestSample> load_split(const std::string& dir, const Manifest& manifest,
                                   const std::string& split, const ExperimentConfig& cfg,
                                   bool with_products, int limit) {
    auto it = manifest.splits.find(split);
    check(it != manifest.splits.end(), "dataset: manifest has no split '", split, "'");
    const auto& entries = it->second;
    int count = static_cast<int>(entries.size());
    if (limit > 0) count = std::min(count, limit);

    std::vector<TestSample> samples(static_cast<size_t>(count));
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < count; ++i) {
        const auto& e = entries[static_cast<size_t>(i)];
        TestSample s;
        s.seed = e.seed;
        s.phantom = load_image((fs::path(dir) / e.phantom_file).string());
        s.few_sino = load_sinogram((fs::path(dir) / e.sino_file).string());
        if (with_products)
            s.prods = prepare_inputs(s.few_sino, manifest.n, manifest.nv_dense, manifest.n_det,
                                     FilterKind::SheppLogan, s.phantom.pixel_size,
                                     cfg.radon_step_px);
        samples[static_cast<size_t>(i)] = std::move(s);
    }
    return samples;
}

void require_geometry_match(const Manifest& m, const ExperimentConfig& cfg) {
    ExperimentConfig c = cfg;
    c.resolve_defaults();
    require(m.n == c.n && m.nv_few == c.nv_few && m.nv_dense == c.nv_dense &&
                m.n_det == c.n_det,
            "dataset: geometry mismatch (manifest n=", m.n, " nv_few=", m.nv_few,
            " nv_dense=", m.nv_dense, " n_det=", m.n_det, "; config n=", c.n,
            " nv_few=", c.nv_few, " nv_dense=", c.nv_dense, " n_det=", c.n_det, ")");
}

}  // namespace deer
