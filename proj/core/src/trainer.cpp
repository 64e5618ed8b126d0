#include "deer/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "deer/losses.hpp"

namespace deer {

namespace op = deer::ops;

std::string to_string(Phase p) { return p == Phase::PretrainBp ? "pretrain-bp" : "joint"; }

Phase phase_from_string(const std::string& s) {
    if (s == "pretrain-bp") return Phase::PretrainBp;
    if (s == "joint") return Phase::Joint;
    throw std::invalid_argument("unknown phase '" + s + "'");
}

TrainState init_train_state(const ExperimentConfig& cfg) {
    ExperimentConfig c = cfg;
    c.resolve_defaults();
    c.validate();

    TrainState st;
    st.cfg = c;
    Rng rng(seed_stream(c.seed, "init"));
    st.gen = Generator<float>::init(c, rng);
    if (c.adversarial()) st.disc = Discriminator<float>::init(c.n, rng);

    st.opt_bp.add_params(st.gen.bp_params());
    // joint phase: back-projection learning rate is ten times smaller
    st.opt_gen.add_params(st.gen.bp_params(), 0.1f);
    st.opt_gen.add_params(st.gen.refine_params());
    if (st.disc) st.opt_disc.add_params(st.disc->params());

    st.phase = c.has_bp() && c.epochs_phase1 > 0 ? Phase::PretrainBp : Phase::Joint;
    return st;
}

std::string EpochRecord::to_jsonl() const {
    std::ostringstream os;
    auto num = [](double v) {
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%.10g", v);
        return std::string(buf);
    };
    os << "{\"phase\":\"" << phase << "\",\"epoch\":" << epoch << ",\"l1\":" << num(l1)
       << ",\"l1_bp\":" << num(l1_bp) << ",\"l_sl\":" << num(l_sl) << ",\"l_al\":" << num(l_al)
       << ",\"l_g\":" << num(l_g) << ",\"l_d\":" << num(l_d) << ",\"lr_base\":" << num(lr_base)
       << ",\"lr_bp\":" << num(lr_bp) << ",\"batch_size\":" << batch_size
       << ",\"val_psnr\":" << num(val_psnr) << ",\"val_ssim\":" << num(val_ssim)
       << ",\"val_mae\":" << num(val_mae) << ",\"val_count\":" << val_count << "}";
    return os.str();
}

Trainer::Trainer(TrainState state, std::vector<TestSample> train_set,
                 std::vector<TestSample> val_set)
    : state_(std::move(state)), train_(std::move(train_set)), val_(std::move(val_set)) {
    check(!train_.empty(), "trainer: empty training set");
    dense_angles_ = equispaced_angles(state_.cfg.resolved_nv_dense());
}

std::vector<int> Trainer::epoch_order(int count, int epoch_index) const {
    std::vector<int> order(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) order[static_cast<size_t>(i)] = i;
    Rng rng(seed_stream(state_.cfg.seed,
                        strcat_all("shuffle-", to_string(state_.phase), "-", epoch_index)));
    rng.shuffle(order);
    return order;
}

namespace {

struct BatchTensors {
    Tensor<float> filtered;  // [B,Nv',Nd]
    Tensor<float> fbp_img;   // [B,N,N,1]
    Tensor<float> truth;     // [B,N,N,1]
};

BatchTensors make_batch(const std::vector<TestSample>& set, const std::vector<int>& order,
                        size_t begin, size_t end) {
    std::vector<const Sinogram*> sinos;
    std::vector<const Image*> fbps, truths;
    for (size_t i = begin; i < end; ++i) {
        const TestSample& s = set[static_cast<size_t>(order[i])];
        sinos.push_back(&s.prods.filtered_dense_sino);
        fbps.push_back(&s.prods.fbp_image);
        truths.push_back(&s.phantom);
    }
    return {stack_sinograms(sinos), stack_images(fbps), stack_images(truths)};
}

}  // namespace

EpochRecord Trainer::run_pretrain_epoch() {
    const ExperimentConfig& cfg = state_.cfg;
    check(cfg.has_bp(), "trainer: variant '", to_string(cfg.variant),
          "' has no back-projection part to pretrain");
    const int bsz = cfg.batch_phase1;
    std::vector<int> order = epoch_order(static_cast<int>(train_.size()), state_.epoch);

    EpochRecord rec;
    rec.phase = to_string(Phase::PretrainBp);
    rec.epoch = state_.epoch + 1;
    rec.batch_size = bsz;
    rec.lr_base = cfg.lr_bp_pretrain;
    rec.lr_bp = cfg.lr_bp_pretrain;

    int nbatches = 0;
    for (size_t begin = 0; begin < order.size(); begin += static_cast<size_t>(bsz)) {
        const size_t end = std::min(order.size(), begin + static_cast<size_t>(bsz));
        BatchTensors batch = make_batch(train_, order, begin, end);
        Tape<float> tape;
        Tape<float>::Scope scope(tape);
        state_.opt_bp.zero_grad();
        Tensor<float> x_bp = state_.gen.bp->forward(batch.filtered, dense_angles_);
        Tensor<float> l1_bp = loss_mae(x_bp, batch.truth);
        tape.backward(l1_bp);
        state_.opt_bp.step(static_cast<float>(cfg.lr_bp_pretrain));
        rec.l1_bp += static_cast<double>(l1_bp.item());
        ++nbatches;
        ++state_.gstep;
    }
    rec.l1_bp /= std::max(1, nbatches);
    rec.l_g = rec.l1_bp;
    validate_into(rec);
    ++state_.epoch;
    records_.push_back(rec);
    return rec;
}

EpochRecord Trainer::run_joint_epoch() {
    const ExperimentConfig& cfg = state_.cfg;
    const int bsz = cfg.batch_phase2;
    const bool adversarial = cfg.adversarial();
    const float lam_al = static_cast<float>(cfg.lambda_al);
    const float lam_sl = static_cast<float>(cfg.lambda_sl);
    std::vector<int> order = epoch_order(static_cast<int>(train_.size()), state_.epoch);

    EpochRecord rec;
    rec.phase = to_string(Phase::Joint);
    rec.epoch = state_.epoch + 1;
    rec.batch_size = bsz;
    rec.lr_base = cfg.lr_base;
    rec.lr_bp = cfg.lr_base / 10.0;

    SsimParams sp;
    sp.gaussian = cfg.ssim_gaussian;

    int nbatches = 0;
    for (size_t begin = 0; begin < order.size(); begin += static_cast<size_t>(bsz)) {
        const size_t end = std::min(order.size(), begin + static_cast<size_t>(bsz));
        BatchTensors batch = make_batch(train_, order, begin, end);
        Tape<float> tape;
        Tape<float>::Scope scope(tape);
        state_.opt_gen.zero_grad();

        typename Generator<float>::Out out =
            state_.gen.forward(batch.filtered, batch.fbp_img, dense_angles_);

        // discriminator first, on detached generator output, then clip;
        // its graph lives on a nested tape so the generator backward does
        // not replay it
        if (adversarial) {
            Tape<float> tape_d;
            Tape<float>::Scope scope_d(tape_d);
            state_.opt_disc.zero_grad();
            Tensor<float> d_fake = state_.disc->forward(op::detach(out.x));
            Tensor<float> d_real = state_.disc->forward(batch.truth);
            Tensor<float> l_d = loss_discriminator(d_fake, d_real);
            tape_d.backward(l_d);
            state_.opt_disc.step(static_cast<float>(cfg.lr_base));
            state_.disc->clip_weights(static_cast<float>(cfg.clip_c));
            rec.l_d += static_cast<double>(l_d.item());
        }

        Tensor<float> l1 = loss_mae(out.x, batch.truth);
        Tensor<float> l1_bp =
            out.x_bp.defined() ? loss_mae(out.x_bp, batch.truth) : Tensor<float>{};
        Tensor<float> l_sl =
            lam_sl > 0 ? loss_structural(out.x, batch.truth, sp) : Tensor<float>{};
        Tensor<float> l_al;
        if (adversarial) l_al = loss_adversarial(state_.disc->forward(out.x));
        Tensor<float> l_g = loss_generator_total(l_al, l_sl, l1, l1_bp, lam_al, lam_sl);
        tape.backward(l_g);
        state_.opt_gen.step(static_cast<float>(cfg.lr_base));

        rec.l1 += static_cast<double>(l1.item());
        if (l1_bp.defined()) rec.l1_bp += static_cast<double>(l1_bp.item());
        if (l_sl.defined()) rec.l_sl += static_cast<double>(l_sl.item());
        if (l_al.defined()) rec.l_al += static_cast<double>(l_al.item());
        rec.l_g += static_cast<double>(l_g.item());
        ++nbatches;
        ++state_.gstep;
    }
    const double inv = 1.0 / std::max(1, nbatches);
    rec.l1 *= inv;
    rec.l1_bp *= inv;
    rec.l_sl *= inv;
    rec.l_al *= inv;
    rec.l_g *= inv;
    rec.l_d *= inv;
    validate_into(rec);
    ++state_.epoch;
    records_.push_back(rec);
    return rec;
}

void Trainer::validate_into(EpochRecord& rec) {
    if (val_.empty()) return;
    const int limit = state_.cfg.val_subset;
    const size_t count = limit > 0 ? std::min(val_.size(), static_cast<size_t>(limit))
                                   : val_.size();
    Tape<float>::NoGrad off;
    double psnr_acc = 0, ssim_acc = 0, mae_acc = 0;
    for (size_t i = 0; i < count; ++i) {
        const TestSample& s = val_[i];
        BatchTensors one;
        one.filtered = stack_sinograms({&s.prods.filtered_dense_sino});
        one.fbp_img = stack_images({&s.prods.fbp_image});
        typename Generator<float>::Out out =
            state_.gen.forward(one.filtered, one.fbp_img, dense_angles_);
        Image recon = image_from_batch(out.x, 0, s.phantom.pixel_size);
        psnr_acc += psnr_metric(recon, s.phantom, 1.0);
        ssim_acc += ssim_metric(recon, s.phantom);
        mae_acc += mae_metric(recon, s.phantom);
    }
    rec.val_psnr = psnr_acc / static_cast<double>(count);
    rec.val_ssim = ssim_acc / static_cast<double>(count);
    rec.val_mae = mae_acc / static_cast<double>(count);
    rec.val_count = static_cast<int>(count);
}

void Trainer::run(const EpochFn& on_epoch, const CheckpointFn& on_checkpoint) {
    const ExperimentConfig& cfg = state_.cfg;
    if (state_.phase == Phase::PretrainBp) {
        while (state_.epoch < cfg.epochs_phase1) {
            EpochRecord rec = run_pretrain_epoch();
            if (on_epoch) on_epoch(rec);
            if (on_checkpoint) on_checkpoint(state_, Phase::PretrainBp, state_.epoch);
        }
        state_.phase = Phase::Joint;
        state_.epoch = 0;
    }
    while (state_.epoch < cfg.epochs_phase2) {
        EpochRecord rec = run_joint_epoch();
        if (on_epoch) on_epoch(rec);
        if (on_checkpoint) on_checkpoint(state_, Phase::Joint, state_.epoch);
    }
}

}  // namespace deer
