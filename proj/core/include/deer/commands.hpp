#pragma once

#include <string>
#include <vector>

#include "deer/checkpoint.hpp"

namespace deer {

/// CLI entry points. Each returns a process exit code and reports
/// progress on stdout.

int cmd_gen_data(const ExperimentConfig& cfg, bool force);

int cmd_train(const ExperimentConfig& cfg, const std::string& resume_path = "");

int cmd_reconstruct(const std::string& ckpt_path, const std::string& sino_path,
                    const std::string& out_img, const std::string& png_path = "",
                    double png_lo = 0.0, double png_hi = 1.0);

int cmd_evaluate(const ExperimentConfig& cfg, const std::vector<std::string>& ckpt_paths,
                 const std::string& out_dir, const std::string& split = "test");

int cmd_grad_check(int trials, uint64_t seed, double tolerance);

/// Run the generator on one prepared sample (no gradients).
struct GenRecon {
    Image x;
    Image x_bp;  // empty for deer-fbp
    bool has_bp = false;
};
GenRecon reconstruct_sample(const TrainState& st, const TestSample& s);

/// Full chain from a raw few-view sinogram (view-count checks included).
Image reconstruct_from_sinogram(const TrainState& st, const Sinogram& few);

}  // namespace deer
