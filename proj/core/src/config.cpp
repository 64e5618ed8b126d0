#include "deer/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "deer/common.hpp"
#include "deer/phantom.hpp"

namespace deer {

std::string to_string(Variant v) {
    switch (v) {
        case Variant::Deer: return "deer";
        case Variant::DeerLite: return "deer-lite";
        case Variant::DeerSino: return "deer-sino";
        case Variant::DeerFbp: return "deer-fbp";
        case Variant::DeerNoWgan: return "deer-nowgan";
    }
    return "?";
}

Variant variant_from_string(const std::string& s) {
    if (s == "deer") return Variant::Deer;
    if (s == "deer-lite") return Variant::DeerLite;
    if (s == "deer-sino") return Variant::DeerSino;
    if (s == "deer-fbp") return Variant::DeerFbp;
    if (s == "deer-nowgan") return Variant::DeerNoWgan;
    throw std::invalid_argument("unknown variant '" + s + "'");
}

namespace {

struct LambdaDefaults {
    double al, sl;
};

LambdaDefaults variant_lambdas(Variant v) {
    switch (v) {
        case Variant::Deer: return {0.0025, 0.8};
        case Variant::DeerLite: return {0.0025, 0.8};
        case Variant::DeerSino: return {0.002, 0.65};
        case Variant::DeerFbp: return {0.0025, 0.65};
        case Variant::DeerNoWgan: return {0.0, 0.8};
    }
    return {0.0, 0.8};
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

bool ExperimentConfig::adversarial() const {
    double al = lambda_al < 0 ? variant_lambdas(variant).al : lambda_al;
    return al > 0.0;
}

void ExperimentConfig::resolve_defaults() {
    nv_dense = resolved_nv_dense();
    n_det = resolved_n_det();
    LambdaDefaults d = variant_lambdas(variant);
    if (lambda_al < 0) lambda_al = d.al;
    if (lambda_sl < 0) lambda_sl = d.sl;
}

void ExperimentConfig::validate() const {
    check(n >= 8 && n <= 1024, "config: n must be in [8,1024], got ", n);
    check(n % 8 == 0, "config: n must be a multiple of 8, got ", n);
    check(nv_few >= 1 && nv_few <= 4096, "config: nv_few must be in [1,4096], got ", nv_few);
    check(nv_dense >= 0 && nv_dense <= 8192, "config: nv_dense must be in [0,8192], got ",
          nv_dense);
    check(n_det == 0 || n_det == n, "config: n_det must equal n (got n_det=", n_det, ", n=", n,
          "); the learned layer rotates square view images");
    check(padding == "same" || padding == "valid", "config: padding must be same|valid, got '",
          padding, "'");
    check(lambda_al >= 0 || lambda_al == -1.0, "config: lambda_al must be >= 0");
    check(lambda_sl >= 0 || lambda_sl == -1.0, "config: lambda_sl must be >= 0");
    check(clip_c > 0, "config: clip_c must be positive, got ", clip_c);
    check(lr_base > 0 && lr_base <= 1.0, "config: lr_base must be in (0,1], got ", lr_base);
    check(lr_bp_pretrain > 0 && lr_bp_pretrain <= 1.0, "config: lr_bp_pretrain out of range");
    check(batch_phase1 >= 1 && batch_phase1 <= 256, "config: batch_phase1 out of [1,256]");
    check(batch_phase2 >= 1 && batch_phase2 <= 256, "config: batch_phase2 out of [1,256]");
    check(epochs_phase1 >= 0 && epochs_phase1 <= 10000, "config: epochs_phase1 out of range");
    check(epochs_phase2 >= 0 && epochs_phase2 <= 10000, "config: epochs_phase2 out of range");
    check(train_count >= 0 && train_count < 500000, "config: train_count out of [0,500000)");
    check(val_count >= 0 && val_count < 500000, "config: val_count out of [0,500000)");
    check(test_count >= 0 && test_count < 500000, "config: test_count out of [0,500000)");
    check(val_subset >= 0, "config: val_subset must be >= 0");
    phantom_kind_from_string(phantom_kind);  // throws on bad value
    check(radon_step_px > 0 && radon_step_px <= 1.0, "config: radon_step_px must be in (0,1]");
    check(checkpoint_keep == "all" || checkpoint_keep == "final",
          "config: checkpoint_keep must be all|final, got '", checkpoint_keep, "'");
    check(png_lo < png_hi, "config: png window must satisfy lo < hi");
}

std::string ExperimentConfig::serialize() const {
    ExperimentConfig c = *this;
    c.resolve_defaults();
    std::ostringstream os;
    os << "n = " << c.n << "\n";
    os << "nv_few = " << c.nv_few << "\n";
    os << "nv_dense = " << c.nv_dense << "\n";
    os << "n_det = " << c.n_det << "\n";
    os << "variant = " << to_string(c.variant) << "\n";
    os << "padding = " << c.padding << "\n";
    os << "relu_head = " << (c.relu_head ? "true" : "false") << "\n";
    os << "lambda_al = " << fmt_double(c.lambda_al) << "\n";
    os << "lambda_sl = " << fmt_double(c.lambda_sl) << "\n";
    os << "clip_c = " << fmt_double(c.clip_c) << "\n";
    os << "ssim_gaussian = " << (c.ssim_gaussian ? "true" : "false") << "\n";
    os << "lr_base = " << fmt_double(c.lr_base) << "\n";
    os << "lr_bp_pretrain = " << fmt_double(c.lr_bp_pretrain) << "\n";
    os << "batch_phase1 = " << c.batch_phase1 << "\n";
    os << "batch_phase2 = " << c.batch_phase2 << "\n";
    os << "epochs_phase1 = " << c.epochs_phase1 << "\n";
    os << "epochs_phase2 = " << c.epochs_phase2 << "\n";
    os << "seed = " << c.seed << "\n";
    os << "train_count = " << c.train_count << "\n";
    os << "val_count = " << c.val_count << "\n";
    os << "test_count = " << c.test_count << "\n";
    os << "val_subset = " << c.val_subset << "\n";
    os << "phantom_kind = " << c.phantom_kind << "\n";
    os << "radon_step_px = " << fmt_double(c.radon_step_px) << "\n";
    os << "data_dir = " << c.data_dir << "\n";
    os << "out_dir = " << c.out_dir << "\n";
    os << "checkpoint_keep = " << c.checkpoint_keep << "\n";
    os << "png_lo = " << fmt_double(c.png_lo) << "\n";
    os << "png_hi = " << fmt_double(c.png_hi) << "\n";
    return os.str();
}

namespace {

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("config: key '" + key + "' expects true|false, got '" + v + "'");
}

int parse_int(const std::string& key, const std::string& v) {
    size_t pos = 0;
    int r;
    try {
        r = std::stoi(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: key '" + key + "' expects an integer, got '" + v +
                                    "'");
    }
    check(pos == v.size(), "config: key '", key, "' has trailing junk in '", v, "'");
    return r;
}

uint64_t parse_u64(const std::string& key, const std::string& v) {
    size_t pos = 0;
    unsigned long long r;
    try {
        r = std::stoull(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: key '" + key + "' expects an unsigned integer");
    }
    check(pos == v.size(), "config: key '", key, "' has trailing junk in '", v, "'");
    return r;
}

double parse_double(const std::string& key, const std::string& v) {
    size_t pos = 0;
    double r;
    try {
        r = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: key '" + key + "' expects a number, got '" + v +
                                    "'");
    }
    check(pos == v.size(), "config: key '", key, "' has trailing junk in '", v, "'");
    check(std::isfinite(r), "config: key '", key, "' must be finite");
    return r;
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
    ExperimentConfig c;
    std::map<std::string, bool> seen;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        size_t eq = t.find('=');
        check(eq != std::string::npos, "config: line ", lineno, " is not 'key = value': '", t,
              "'");
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        check(!key.empty() && !val.empty(), "config: line ", lineno, " has empty key or value");
        check(!seen[key], "config: duplicate key '", key, "' at line ", lineno);
        seen[key] = true;

        if (key == "n") c.n = parse_int(key, val);
        else if (key == "nv_few") c.nv_few = parse_int(key, val);
        else if (key == "nv_dense") c.nv_dense = parse_int(key, val);
        else if (key == "n_det") c.n_det = parse_int(key, val);
        else if (key == "variant") c.variant = variant_from_string(val);
        else if (key == "padding") c.padding = val;
        else if (key == "relu_head") c.relu_head = parse_bool(key, val);
        else if (key == "lambda_al") c.lambda_al = parse_double(key, val);
        else if (key == "lambda_sl") c.lambda_sl = parse_double(key, val);
        else if (key == "clip_c") c.clip_c = parse_double(key, val);
        else if (key == "ssim_gaussian") c.ssim_gaussian = parse_bool(key, val);
        else if (key == "lr_base") c.lr_base = parse_double(key, val);
        else if (key == "lr_bp_pretrain") c.lr_bp_pretrain = parse_double(key, val);
        else if (key == "batch_phase1") c.batch_phase1 = parse_int(key, val);
        else if (key == "batch_phase2") c.batch_phase2 = parse_int(key, val);
        else if (key == "epochs_phase1") c.epochs_phase1 = parse_int(key, val);
        else if (key == "epochs_phase2") c.epochs_phase2 = parse_int(key, val);
        else if (key == "seed") c.seed = parse_u64(key, val);
        else if (key == "train_count") c.train_count = parse_int(key, val);
        else if (key == "val_count") c.val_count = parse_int(key, val);
        else if (key == "test_count") c.test_count = parse_int(key, val);
        else if (key == "val_subset") c.val_subset = parse_int(key, val);
        else if (key == "phantom_kind") c.phantom_kind = val;
        else if (key == "radon_step_px") c.radon_step_px = parse_double(key, val);
        else if (key == "data_dir") c.data_dir = val;
        else if (key == "out_dir") c.out_dir = val;
        else if (key == "checkpoint_keep") c.checkpoint_keep = val;
        else if (key == "png_lo") c.png_lo = parse_double(key, val);
        else if (key == "png_hi") c.png_hi = parse_double(key, val);
        else
            throw std::invalid_argument(
                strcat_all("config: unknown key '", key, "' at line ", lineno));
    }
    c.resolve_defaults();
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load_file(const std::string& path) {
    std::ifstream f(path);
    require(f.good(), "config: cannot open '", path, "'");
    std::ostringstream os;
    os << f.rdbuf();
    return parse(os.str());
}

uint64_t ExperimentConfig::hash() const { return fnv1a64(serialize()); }

}  // namespace deer
