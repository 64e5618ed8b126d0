#include "deer/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "deer/grad_check.hpp"
#include "deer/raster_io.hpp"

namespace deer {

namespace fs = std::filesystem;

int cmd_gen_data(const ExperimentConfig& cfg, bool force) {
    Manifest m = generate_dataset(cfg, force);
    std::printf("gen-data: wrote %zu train / %zu val / %zu test samples to %s\n",
                m.splits["train"].size(), m.splits["val"].size(), m.splits["test"].size(),
                cfg.data_dir.c_str());
    std::printf("gen-data: manifest hash %016llx\n",
                static_cast<unsigned long long>(dataset_manifest_hash(cfg.data_dir)));
    return 0;
}

namespace {

std::string ckpt_name(Phase phase, int epoch) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "ckpt_%s_e%04d.dckpt", to_string(phase).c_str(), epoch);
    return buf;
}

}  // namespace

int cmd_train(const ExperimentConfig& cfg_in, const std::string& resume_path) {
    ExperimentConfig cfg = cfg_in;
    cfg.resolve_defaults();
    cfg.validate();

    Manifest manifest = load_manifest(cfg.data_dir);
    require_geometry_match(manifest, cfg);
    std::printf("train: loading dataset from %s ...\n", cfg.data_dir.c_str());
    std::vector<TestSample> train_set =
        load_split(cfg.data_dir, manifest, "train", cfg, true, cfg.train_count);
    std::vector<TestSample> val_set =
        load_split(cfg.data_dir, manifest, "val", cfg, true, cfg.val_count);

    TrainState state;
    if (!resume_path.empty()) {
        state = load_checkpoint(resume_path);
        require(state.cfg.hash() == cfg.hash(),
                "train: checkpoint config differs from --config (hashes ",
                state.cfg.hash(), " vs ", cfg.hash(), "); refusing to resume");
        std::printf("train: resumed from %s (phase %s, epoch %d)\n", resume_path.c_str(),
                    to_string(state.phase).c_str(), state.epoch);
    } else {
        state = init_train_state(cfg);
    }

    fs::create_directories(cfg.out_dir);
    {
        std::ofstream cfg_os(fs::path(cfg.out_dir) / "resolved_config.cfg");
        cfg_os << cfg.serialize();
    }
    std::ofstream log(fs::path(cfg.out_dir) / "train_log.jsonl", std::ios::app);
    require(log.good(), "train: cannot open log in '", cfg.out_dir, "'");

    Trainer trainer(std::move(state), std::move(train_set), std::move(val_set));
    trainer.run(
        [&](const EpochRecord& r) {
            log << r.to_jsonl() << "\n";
            log.flush();
            std::printf("[%s e%03d] l_g=%.5f l1=%.5f l1_bp=%.5f l_sl=%.5f val_ssim=%.4f "
                        "val_mae=%.5f\n",
                        r.phase.c_str(), r.epoch, r.l_g, r.l1, r.l1_bp, r.l_sl, r.val_ssim,
                        r.val_mae);
            std::fflush(stdout);
        },
        [&](const TrainState& st, Phase phase, int epoch) {
            fs::path dir(st.cfg.out_dir);
            if (st.cfg.checkpoint_keep == "all") {
                save_checkpoint((dir / ckpt_name(phase, epoch)).string(), st);
            } else {
                save_checkpoint((dir / "ckpt_latest.dckpt.tmp").string(), st);
                fs::rename(dir / "ckpt_latest.dckpt.tmp", dir / "ckpt_latest.dckpt");
            }
        });

    save_checkpoint((fs::path(cfg.out_dir) / "ckpt_final.dckpt").string(), trainer.state());
    std::printf("train: done; final checkpoint at %s/ckpt_final.dckpt\n", cfg.out_dir.c_str());
    return 0;
}

GenRecon reconstruct_sample(const TrainState& st, const TestSample& s) {
    Tape<float>::NoGrad off;
    Tensor<float> filtered = stack_sinograms({&s.prods.filtered_dense_sino});
    Tensor<float> fbp_img = stack_images({&s.prods.fbp_image});
    const std::vector<double> angles = s.prods.dense_sino.angles;
    typename Generator<float>::Out out = st.gen.forward(filtered, fbp_img, angles);
    GenRecon r;
    r.x = image_from_batch(out.x, 0, s.phantom.n ? s.phantom.pixel_size : 1.0);
    r.has_bp = out.x_bp.defined();
    if (r.has_bp) {
        r.x_bp = image_from_batch(out.x_bp, 0, r.x.pixel_size);
        if (st.cfg.lite())
            r.x_bp = lite_rescale(r.x_bp, st.cfg.resolved_nv_dense(),
                                  s.prods.dense_sino.n_views());
    }
    return r;
}

Image reconstruct_from_sinogram(const TrainState& st, const Sinogram& few) {
    const ExperimentConfig& cfg = st.cfg;
    const int views = few.n_views();
    const int dense =
        std::max(1, static_cast<int>(std::llround(static_cast<double>(views) * cfg.nv_dense /
                                                  cfg.nv_few)));
    if (!cfg.lite() && cfg.has_bp())
        require(dense == cfg.resolved_nv_dense(),
                "reconstruct: view-dependent checkpoint was trained for ",
                cfg.resolved_nv_dense(), " dense views but the ", views,
                "-view input implies ", dense,
                " (only deer-lite transfers across view counts)");

    TestSample s;
    s.phantom = Image(cfg.n);  // placeholder carrying geometry only
    s.few_sino = few;
    s.prods = prepare_inputs(few, cfg.n, dense, cfg.resolved_n_det(), FilterKind::SheppLogan,
                             1.0, cfg.radon_step_px);
    return reconstruct_sample(st, s).x;
}

int cmd_reconstruct(const std::string& ckpt_path, const std::string& sino_path,
                    const std::string& out_img, const std::string& png_path, double png_lo,
                    double png_hi) {
    TrainState state = load_checkpoint(ckpt_path);
    Sinogram few = load_sinogram(sino_path);
    Image recon = reconstruct_from_sinogram(state, few);
    save_image(out_img, recon);
    std::printf("reconstruct: %s (%d views) -> %s (%dx%d)\n", sino_path.c_str(), few.n_views(),
                out_img.c_str(), recon.n, recon.n);
    if (!png_path.empty()) {
        write_png_gray(png_path, recon, png_lo, png_hi);
        std::printf("reconstruct: png written to %s (window [%g, %g])\n", png_path.c_str(),
                    png_lo, png_hi);
    }
    return 0;
}

int cmd_evaluate(const ExperimentConfig& cfg_in, const std::vector<std::string>& ckpt_paths,
                 const std::string& out_dir, const std::string& split) {
    ExperimentConfig cfg = cfg_in;
    cfg.resolve_defaults();
    cfg.validate();
    Manifest manifest = load_manifest(cfg.data_dir);
    require_geometry_match(manifest, cfg);
    std::printf("evaluate: loading %s split from %s ...\n", split.c_str(),
                cfg.data_dir.c_str());
    std::vector<TestSample> samples =
        load_split(cfg.data_dir, manifest, split, cfg, true,
                   split == "test" ? cfg.test_count : 0);

    std::vector<MethodSpec> methods;
    const FilterKernel kernel = FilterKernel::make(FilterKind::SheppLogan, manifest.n_det, 1.0);
    methods.push_back({"fbp-fewview", [&, kernel](const TestSample& s) {
                           FilterKernel k =
                               FilterKernel::make(FilterKind::SheppLogan, s.few_sino.n_det,
                                                  s.few_sino.det_spacing);
                           return fbp(s.few_sino, k, s.phantom.n, s.phantom.pixel_size);
                       }});
    methods.push_back({"fbp-dense", [kernel](const TestSample& s) {
                           return fbp(s.prods.dense_sino, kernel, s.phantom.n,
                                      s.phantom.pixel_size);
                       }});

    std::vector<TrainState> states;
    states.reserve(ckpt_paths.size());
    for (const auto& path : ckpt_paths) {
        states.push_back(load_checkpoint(path));
        const TrainState& st = states.back();
        require(st.cfg.n == manifest.n && st.cfg.resolved_nv_dense() == manifest.nv_dense &&
                    st.cfg.nv_few == manifest.nv_few,
                "evaluate: checkpoint '", path, "' geometry (n=", st.cfg.n,
                ", nv_few=", st.cfg.nv_few, ", nv_dense=", st.cfg.resolved_nv_dense(),
                ") does not match dataset (n=", manifest.n, ", nv_few=", manifest.nv_few,
                ", nv_dense=", manifest.nv_dense, ")");
    }
    for (size_t i = 0; i < states.size(); ++i) {
        std::string base = to_string(states[i].cfg.variant);
        for (size_t j = 0; j < i; ++j)
            if (to_string(states[j].cfg.variant) == base) base += "+";
        const TrainState* st = &states[i];
        methods.push_back({base, [st](const TestSample& s) {
                               return reconstruct_sample(*st, s).x;
                           }});
        if (st->cfg.has_bp())
            methods.push_back({base + "-bp", [st](const TestSample& s) {
                                   return reconstruct_sample(*st, s).x_bp;
                               }});
    }

    MetricReport report = evaluate_methods(methods, samples);
    const std::string table = render_table(report);
    std::printf("%s", table.c_str());
    fs::create_directories(out_dir);
    {
        std::ofstream os(fs::path(out_dir) / "metrics_table.txt");
        os << table;
    }
    {
        std::ofstream os(fs::path(out_dir) / "metrics.jsonl");
        os << report_jsonl(report);
    }
    std::printf("evaluate: wrote %s/metrics_table.txt and metrics.jsonl\n", out_dir.c_str());
    return 0;
}

int cmd_grad_check(int trials, uint64_t seed, double tolerance) {
    std::printf("grad-check: %d f64 trials per operator, step 1e-5, tolerance %g\n", trials,
                tolerance);
    std::vector<GradCheckResult> results = run_grad_certification(trials, seed);
    int failures = 0;
    for (const auto& r : results) {
        const bool ok = r.max_rel_err < tolerance;
        std::printf("  %-22s max rel err %.3e  %s\n", r.op.c_str(), r.max_rel_err,
                    ok ? "ok" : "FAIL");
        if (!ok) ++failures;
    }
    std::printf("grad-check: %zu operators, %d failures\n", results.size(), failures);
    return failures == 0 ? 0 : 1;
}

}  // namespace deer
