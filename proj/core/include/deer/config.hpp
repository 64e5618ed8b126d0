#pragma once

#include <cstdint>
#include <string>

namespace deer {

enum class Variant { Deer, DeerLite, DeerSino, DeerFbp, DeerNoWgan };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

/// All architectural, loss and schedule hyperparameters of one
/// experiment. Config files are strict `key = value` text: unknown keys
/// are rejected and serialize() writes every resolved field, so a run is
/// reproducible from its config file alone.
struct ExperimentConfig {
    // geometry
    int n = 64;
    int nv_few = 15;
    int nv_dense = 0;  // 0 -> 2 * nv_few
    int n_det = 0;     // 0 -> n

    // model
    Variant variant = Variant::DeerNoWgan;
    std::string padding = "same";  // same | valid
    bool relu_head = false;        // ReLU instead of linear on the last refinement layer

    // losses (negative -> per-variant default)
    double lambda_al = -1.0;
    double lambda_sl = -1.0;
    double clip_c = 0.01;
    bool ssim_gaussian = false;

    // optimization
    double lr_base = 1e-4;
    double lr_bp_pretrain = 1e-3;
    int batch_phase1 = 5;
    int batch_phase2 = 3;
    int epochs_phase1 = 10;
    int epochs_phase2 = 50;

    // data
    uint64_t seed = 1234;
    int train_count = 2000;
    int val_count = 200;
    int test_count = 200;
    int val_subset = 32;  // per-epoch validation sample cap (0 = full split)
    std::string phantom_kind = "random-ellipses";
    double radon_step_px = 0.5;

    // io
    std::string data_dir = "data";
    std::string out_dir = "out";
    std::string checkpoint_keep = "all";  // all | final
    double png_lo = 0.0;
    double png_hi = 1.0;

    /// Fill nv_dense / n_det / lambda defaults in place.
    void resolve_defaults();
    void validate() const;

    int resolved_nv_dense() const { return nv_dense == 0 ? 2 * nv_few : nv_dense; }
    int resolved_n_det() const { return n_det == 0 ? n : n_det; }
    bool has_bp() const { return variant != Variant::DeerFbp; }
    bool lite() const { return variant == Variant::DeerLite; }
    bool adversarial() const;

    /// Canonical key=value text of the resolved config.
    std::string serialize() const;
    static ExperimentConfig parse(const std::string& text);
    static ExperimentConfig load_file(const std::string& path);
    uint64_t hash() const;
};

}  // namespace deer
