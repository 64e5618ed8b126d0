#include "deer/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "deer/model.hpp"

namespace deer {

namespace {

void check_same_size(const char* what, const Image& x, const Image& y) {
    check(x.n == y.n, what, ": image sizes differ, ", x.n, " vs ", y.n);
}

}  // namespace

double mae_metric(const Image& x, const Image& y) {
    check_same_size("mae", x, y);
    double acc = 0.0;
    for (size_t i = 0; i < x.data.size(); ++i)
        acc += std::fabs(static_cast<double>(x.data[i]) - static_cast<double>(y.data[i]));
    return acc / static_cast<double>(x.data.size());
}

double psnr_metric(const Image& x, const Image& y, double peak) {
    check_same_size("psnr", x, y);
    check(peak > 0, "psnr: peak must be positive, got ", peak);
    double mse = 0.0;
    for (size_t i = 0; i < x.data.size(); ++i) {
        const double d = static_cast<double>(x.data[i]) - static_cast<double>(y.data[i]);
        mse += d * d;
    }
    mse /= static_cast<double>(x.data.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

double ssim_metric(const Image& x, const Image& y, const SsimParams& p) {
    check_same_size("ssim", x, y);
    Tape<float>::NoGrad off;
    Tensor<float> tx = stack_images({&x});
    Tensor<float> ty = stack_images({&y});
    return static_cast<double>(ssim_graph(tx, ty, p).item());
}

namespace {

MetricStats aggregate(const std::vector<double>& values) {
    MetricStats s;
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(var / static_cast<double>(values.size()));
    return s;
}

std::string fmt_metric(double v, int prec) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "-";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
    return buf;
}

}  // namespace

MetricReport evaluate_methods(const std::vector<MethodSpec>& methods,
                              const std::vector<TestSample>& samples, const SsimParams& p) {
    check(!methods.empty(), "evaluate: empty method list");
    check(!samples.empty(), "evaluate: empty test set");
    MetricReport report;
    report.count = static_cast<int>(samples.size());
    const int n = samples.front().phantom.n;
    for (const auto& m : methods) {
        MethodMetrics mm;
        mm.name = m.name;
        for (const auto& s : samples) {
            Image recon = m.recon(s);
            check(recon.n == n, "evaluate: method '", m.name, "' produced ", recon.n, "x",
                  recon.n, " image, expected ", n, "x", n);
            mm.psnr_values.push_back(psnr_metric(recon, s.phantom, 1.0));
            mm.ssim_values.push_back(ssim_metric(recon, s.phantom, p));
            mm.mae_values.push_back(mae_metric(recon, s.phantom));
        }
        mm.psnr = aggregate(mm.psnr_values);
        mm.ssim = aggregate(mm.ssim_values);
        mm.mae = aggregate(mm.mae_values);
        report.methods.push_back(std::move(mm));
    }
    return report;
}

std::string render_table(const MetricReport& report) {
    std::ostringstream os;
    os << "method                      PSNR [dB]           SSIM                MAE\n";
    os << "------------------------------------------------------------------------------\n";
    for (const auto& m : report.methods) {
        char line[256];
        std::snprintf(line, sizeof(line), "%-24s  %9s +- %-7s  %7s +- %-7s  %7s +- %s\n",
                      m.name.c_str(), fmt_metric(m.psnr.mean, 4).c_str(),
                      fmt_metric(m.psnr.stddev, 4).c_str(), fmt_metric(m.ssim.mean, 4).c_str(),
                      fmt_metric(m.ssim.stddev, 4).c_str(), fmt_metric(m.mae.mean, 5).c_str(),
                      fmt_metric(m.mae.stddev, 5).c_str());
        os << line;
    }
    os << "(" << report.count << " test images)\n";
    return os.str();
}

std::string report_jsonl(const MetricReport& report) {
    std::ostringstream os;
    auto num = [](double v) -> std::string {
        if (std::isinf(v) || std::isnan(v)) return "\"" + fmt_metric(v, 0) + "\"";
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.10g", v);
        return buf;
    };
    for (const auto& m : report.methods) {
        os << "{\"method\":\"" << m.name << "\",\"count\":" << report.count
           << ",\"psnr_mean\":" << num(m.psnr.mean) << ",\"psnr_std\":" << num(m.psnr.stddev)
           << ",\"ssim_mean\":" << num(m.ssim.mean) << ",\"ssim_std\":" << num(m.ssim.stddev)
           << ",\"mae_mean\":" << num(m.mae.mean) << ",\"mae_std\":" << num(m.mae.stddev)
           << "}\n";
    }
    return os.str();
}

}  // namespace deer
