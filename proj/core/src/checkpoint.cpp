#include "deer/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace deer {

namespace {

constexpr char kMagic[8] = {'D', 'E', 'E', 'R', 'C', 'K', 'P', '1'};
constexpr char kTrailer[8] = {'D', 'E', 'E', 'R', 'E', 'N', 'D', '1'};

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is, const std::string& path) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    require(is.gcount() == sizeof(T), "checkpoint: '", path, "' truncated");
    return v;
}

void write_string(std::ostream& os, const std::string& s) {
    write_pod<uint32_t>(os, static_cast<uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is, const std::string& path) {
    const uint32_t len = read_pod<uint32_t>(is, path);
    require(len <= (1u << 20), "checkpoint: '", path, "' has implausible string length ", len);
    std::string s(len, '\0');
    is.read(s.data(), len);
    require(is.gcount() == static_cast<std::streamsize>(len), "checkpoint: '", path,
            "' truncated");
    return s;
}

void write_floats(std::ostream& os, const float* p, int64_t count) {
    write_pod<int64_t>(os, count);
    os.write(reinterpret_cast<const char*>(p),
             static_cast<std::streamsize>(count * static_cast<int64_t>(sizeof(float))));
}

void read_floats(std::istream& is, const std::string& path, float* p, int64_t expected) {
    const int64_t count = read_pod<int64_t>(is, path);
    require(count == expected, "checkpoint: '", path, "' tensor length ", count, " != expected ",
            expected);
    is.read(reinterpret_cast<char*>(p),
            static_cast<std::streamsize>(count * static_cast<int64_t>(sizeof(float))));
    require(is.gcount() == static_cast<std::streamsize>(count * static_cast<int64_t>(sizeof(float))),
            "checkpoint: '", path, "' truncated");
}

void write_params(std::ostream& os, const std::vector<NamedParam<float>>& params) {
    write_pod<uint32_t>(os, static_cast<uint32_t>(params.size()));
    for (const auto& p : params) {
        write_string(os, p.name);
        write_pod<uint8_t>(os, static_cast<uint8_t>(p.tensor.rank()));
        for (int i = 0; i < p.tensor.rank(); ++i) write_pod<int64_t>(os, p.tensor.dim(i));
        write_floats(os, p.tensor.data(), p.tensor.numel());
    }
}

void read_params(std::istream& is, const std::string& path,
                 std::vector<NamedParam<float>> params) {
    const uint32_t count = read_pod<uint32_t>(is, path);
    require(count == params.size(), "checkpoint: '", path, "' holds ", count,
            " parameters, model expects ", params.size());
    for (auto& p : params) {
        const std::string name = read_string(is, path);
        require(name == p.name, "checkpoint: '", path, "' parameter '", name,
                "' does not match expected '", p.name, "'");
        const uint8_t rank = read_pod<uint8_t>(is, path);
        require(rank == p.tensor.rank(), "checkpoint: '", path, "' parameter '", name,
                "' rank mismatch");
        for (int i = 0; i < p.tensor.rank(); ++i) {
            const int64_t d = read_pod<int64_t>(is, path);
            require(d == p.tensor.dim(i), "checkpoint: '", path, "' parameter '", name,
                    "' dim ", i, " is ", d, ", expected ", p.tensor.dim(i));
        }
        read_floats(is, path, p.tensor.mutable_data(), p.tensor.numel());
    }
}

void write_adam(std::ostream& os, const Adam<float>& opt) {
    write_pod<int64_t>(os, opt.t());
    write_pod<uint32_t>(os, static_cast<uint32_t>(opt.slots().size()));
    for (const auto& s : opt.slots()) {
        write_string(os, s.name);
        write_floats(os, s.m.data(), static_cast<int64_t>(s.m.size()));
        write_floats(os, s.v.data(), static_cast<int64_t>(s.v.size()));
    }
}

void read_adam(std::istream& is, const std::string& path, Adam<float>& opt) {
    opt.set_t(read_pod<int64_t>(is, path));
    const uint32_t count = read_pod<uint32_t>(is, path);
    require(count == opt.slots().size(), "checkpoint: '", path, "' optimizer has ", count,
            " slots, model expects ", opt.slots().size());
    for (auto& s : opt.slots()) {
        const std::string name = read_string(is, path);
        require(name == s.name, "checkpoint: '", path, "' optimizer slot '", name,
                "' does not match expected '", s.name, "'");
        read_floats(is, path, s.m.data(), static_cast<int64_t>(s.m.size()));
        read_floats(is, path, s.v.data(), static_cast<int64_t>(s.v.size()));
    }
}

}  // namespace

void save_checkpoint(const std::string& path, const TrainState& state) {
    std::ofstream os(path, std::ios::binary);
    require(os.good(), "checkpoint: cannot write '", path, "'");
    os.write(kMagic, sizeof(kMagic));
    const std::string cfg_text = state.cfg.serialize();
    write_pod<uint64_t>(os, fnv1a64(cfg_text));
    write_string(os, cfg_text);
    write_pod<uint32_t>(os, state.phase == Phase::PretrainBp ? 0u : 1u);
    write_pod<int64_t>(os, state.epoch);
    write_pod<int64_t>(os, state.gstep);

    TrainState& st = const_cast<TrainState&>(state);  // params() is non-const, data untouched
    std::vector<NamedParam<float>> params = st.gen.params();
    if (st.disc)
        for (auto& p : st.disc->params()) params.push_back(p);
    write_params(os, params);
    write_adam(os, state.opt_bp);
    write_adam(os, state.opt_gen);
    write_adam(os, state.opt_disc);
    os.write(kTrailer, sizeof(kTrailer));
    require(os.good(), "checkpoint: short write to '", path, "'");
}

namespace {

struct OpenCheckpoint {
    std::ifstream is;
    ExperimentConfig cfg;
    Phase phase;
    int64_t epoch, gstep;
    uint64_t config_hash;
};

OpenCheckpoint open_checkpoint(const std::string& path) {
    OpenCheckpoint oc{std::ifstream(path, std::ios::binary), {}, Phase::PretrainBp, 0, 0, 0};
    require(oc.is.good(), "checkpoint: cannot open '", path, "'");
    char magic[8];
    oc.is.read(magic, sizeof(magic));
    require(oc.is.gcount() == 8 && std::memcmp(magic, kMagic, 8) == 0, "checkpoint: '", path,
            "' has bad magic");
    oc.config_hash = read_pod<uint64_t>(oc.is, path);
    const std::string cfg_text = read_string(oc.is, path);
    require(fnv1a64(cfg_text) == oc.config_hash, "checkpoint: '", path,
            "' config hash mismatch (corrupt header)");
    oc.cfg = ExperimentConfig::parse(cfg_text);
    const uint32_t phase = read_pod<uint32_t>(oc.is, path);
    require(phase <= 1, "checkpoint: '", path, "' has bad phase tag ", phase);
    oc.phase = phase == 0 ? Phase::PretrainBp : Phase::Joint;
    oc.epoch = read_pod<int64_t>(oc.is, path);
    oc.gstep = read_pod<int64_t>(oc.is, path);
    return oc;
}

}  // namespace

TrainState load_checkpoint(const std::string& path) {
    OpenCheckpoint oc = open_checkpoint(path);
    TrainState state = init_train_state(oc.cfg);
    state.phase = oc.phase;
    state.epoch = static_cast<int>(oc.epoch);
    state.gstep = oc.gstep;

    std::vector<NamedParam<float>> params = state.gen.params();
    if (state.disc)
        for (auto& p : state.disc->params()) params.push_back(p);
    read_params(oc.is, path, params);
    read_adam(oc.is, path, state.opt_bp);
    read_adam(oc.is, path, state.opt_gen);
    read_adam(oc.is, path, state.opt_disc);

    char trailer[8];
    oc.is.read(trailer, sizeof(trailer));
    require(oc.is.gcount() == 8 && std::memcmp(trailer, kTrailer, 8) == 0, "checkpoint: '",
            path, "' missing trailer (truncated file)");
    oc.is.peek();
    require(oc.is.eof(), "checkpoint: '", path, "' has trailing bytes");
    return state;
}

CheckpointInfo read_checkpoint_info(const std::string& path) {
    OpenCheckpoint oc = open_checkpoint(path);
    CheckpointInfo info;
    info.cfg = oc.cfg;
    info.phase = oc.phase;
    info.epoch = static_cast<int>(oc.epoch);
    info.gstep = oc.gstep;
    info.config_hash = oc.config_hash;
    return info;
}

}  // namespace deer
