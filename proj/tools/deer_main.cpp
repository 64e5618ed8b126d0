#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>

#include "deer/commands.hpp"

namespace {

// Relative data/output directories resolve under DEER_OUT_ROOT when set.
std::string rooted(const std::string& path) {
    const char* root = std::getenv("DEER_OUT_ROOT");
    if (!root || path.empty() || std::filesystem::path(path).is_absolute()) return path;
    return (std::filesystem::path(root) / path).string();
}

deer::ExperimentConfig load_config(const std::string& config_path, uint64_t* seed_override,
                                   const std::string& out_override) {
    deer::ExperimentConfig cfg = config_path.empty()
                                     ? deer::ExperimentConfig{}
                                     : deer::ExperimentConfig::load_file(config_path);
    if (seed_override) cfg.seed = *seed_override;
    if (!out_override.empty()) cfg.out_dir = out_override;
    cfg.data_dir = rooted(cfg.data_dir);
    cfg.out_dir = rooted(cfg.out_dir);
    cfg.resolve_defaults();
    cfg.validate();
    return cfg;
}

bool parse_window(const std::string& s, double& lo, double& hi) {
    const size_t comma = s.find(',');
    if (comma == std::string::npos) return false;
    try {
        lo = std::stod(s.substr(0, comma));
        hi = std::stod(s.substr(comma + 1));
    } catch (const std::exception&) {
        return false;
    }
    return lo < hi;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deer-ct: few-view CT reconstruction with a learned back-projection"};
    app.require_subcommand(1);

    std::string config_path, out_override, resume, ckpt, sino, out_img, png_path, split = "test";
    std::string png_window;
    std::vector<std::string> ckpts;
    bool force = false;
    uint64_t seed = 0;
    bool seed_set = false;
    int trials = 20;

    auto add_config_opts = [&](CLI::App* sub, bool config_required) {
        sub->add_option("--config", config_path, "experiment config file")
            ->required(config_required);
        sub->add_option("--seed", seed, "override the config seed")
            ->each([&](const std::string&) { seed_set = true; });
        sub->add_option("--out", out_override, "override the config output directory");
    };

    CLI::App* gen = app.add_subcommand("gen-data", "generate a phantom/sinogram dataset");
    add_config_opts(gen, true);
    gen->add_flag("--force", force, "overwrite an existing non-empty dataset directory");

    CLI::App* train = app.add_subcommand("train", "run the two-phase training schedule");
    add_config_opts(train, true);
    train->add_option("--resume", resume, "checkpoint to continue from");

    CLI::App* rec = app.add_subcommand("reconstruct", "reconstruct one sinogram file");
    rec->add_option("--checkpoint", ckpt, "trained checkpoint")->required();
    rec->add_option("--sino", sino, "few-view sinogram raster file")->required();
    rec->add_option("--out", out_img, "output image raster file")->required();
    rec->add_option("--png", png_path, "optional PNG preview path");
    rec->add_option("--png-window", png_window, "display window lo,hi (default 0,1)");

    CLI::App* eval = app.add_subcommand("evaluate", "metric table over a dataset split");
    add_config_opts(eval, true);
    eval->add_option("--checkpoint", ckpts, "checkpoints to evaluate (repeatable)");
    eval->add_option("--split", split, "dataset split (train|val|test)");

    CLI::App* gc = app.add_subcommand("grad-check", "finite-difference operator certification");
    gc->add_option("--trials", trials, "random trials per operator (default 20)");
    gc->add_option("--seed", seed, "base seed")
        ->each([&](const std::string&) { seed_set = true; });

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            return deer::cmd_gen_data(
                load_config(config_path, seed_set ? &seed : nullptr, out_override), force);
        }
        if (train->parsed()) {
            return deer::cmd_train(
                load_config(config_path, seed_set ? &seed : nullptr, out_override), resume);
        }
        if (rec->parsed()) {
            double lo = 0.0, hi = 1.0;
            if (!png_window.empty() && !parse_window(png_window, lo, hi)) {
                std::fprintf(stderr, "reconstruct: bad --png-window '%s' (expected lo,hi)\n",
                             png_window.c_str());
                return 2;
            }
            return deer::cmd_reconstruct(ckpt, rooted(sino), rooted(out_img), rooted(png_path),
                                         lo, hi);
        }
        if (eval->parsed()) {
            deer::ExperimentConfig cfg =
                load_config(config_path, seed_set ? &seed : nullptr, "");
            const std::string out = out_override.empty() ? cfg.out_dir : rooted(out_override);
            return deer::cmd_evaluate(cfg, ckpts, out, split);
        }
        if (gc->parsed()) {
            return deer::cmd_grad_check(trials, seed_set ? seed : 20250809ull, 1e-6);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
