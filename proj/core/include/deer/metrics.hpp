#pragma once

#include <functional>
#include <string>
#include <vector>

#include "deer/image.hpp"
#include "deer/losses.hpp"
#include "deer/pipeline.hpp"

namespace deer {

/// Mean absolute error between two equal-size images.
double mae_metric(const Image& x, const Image& y);

/// 10*log10(peak^2 / MSE); +infinity when MSE == 0 (rendered as a
/// sentinel string in reports, never serialized as a float).
double psnr_metric(const Image& x, const Image& y, double peak = 1.0);

/// Same implementation as the training-time structural loss.
double ssim_metric(const Image& x, const Image& y, const SsimParams& p = {});

/// One evaluation sample: ground truth plus the few-view products every
/// method reconstructs from.
struct TestSample {
    uint64_t seed = 0;
    Image phantom;
    Sinogram few_sino;
    PipelineProducts prods;
};

using ReconFn = std::function<Image(const TestSample&)>;

struct MethodSpec {
    std::string name;
    ReconFn recon;
};

struct MetricStats {
    double mean = 0.0;
    double stddev = 0.0;
};

struct MethodMetrics {
    std::string name;
    MetricStats psnr, ssim, mae;
    std::vector<double> psnr_values, ssim_values, mae_values;
};

struct MetricReport {
    int count = 0;
    std::vector<MethodMetrics> methods;
};

/// Run every method on every sample and aggregate mean +- std per metric.
/// Method order is preserved; inconsistent output shapes are rejected.
MetricReport evaluate_methods(const std::vector<MethodSpec>& methods,
                              const std::vector<TestSample>& samples,
                              const SsimParams& p = {});

std::string render_table(const MetricReport& report);
std::string report_jsonl(const MetricReport& report);

}  // namespace deer
