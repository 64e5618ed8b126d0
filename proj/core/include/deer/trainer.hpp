#pragma once

#include <functional>
#include <optional>

#include "deer/dataset.hpp"
#include "deer/model.hpp"
#include "deer/optimizer.hpp"

namespace deer {

enum class Phase { PretrainBp, Joint };

std::string to_string(Phase p);
Phase phase_from_string(const std::string& s);

/// Everything a resumable run needs: parameters, Adam moments, schedule
/// position and the resolved config (seed included).
struct TrainState {
    ExperimentConfig cfg;
    Generator<float> gen;
    std::optional<Discriminator<float>> disc;
    Adam<float> opt_bp;    // phase 1, back-projection weights only
    Adam<float> opt_gen;   // phase 2, bp at lr/10 + refinement at lr
    Adam<float> opt_disc;  // phase 2, adversarial runs only
    Phase phase = Phase::PretrainBp;
    int epoch = 0;  // completed epochs within the current phase
    int64_t gstep = 0;
};

TrainState init_train_state(const ExperimentConfig& cfg);

struct EpochRecord {
    std::string phase;
    int epoch = 0;  // 1-based within phase
    double l1 = 0, l1_bp = 0, l_sl = 0, l_al = 0, l_g = 0, l_d = 0;
    double lr_base = 0, lr_bp = 0;
    int batch_size = 0;
    double val_psnr = 0, val_ssim = 0, val_mae = 0;
    int val_count = 0;
    std::string to_jsonl() const;
};

/// Two-phase training loop: the back-projection part pretrains alone on
/// its MAE term, then the whole generator (and, when lambda_al > 0, the
/// weight-clipped discriminator, updated first each iteration) trains
/// jointly with the composite objective.
class Trainer {
public:
    using EpochFn = std::function<void(const EpochRecord&)>;
    using CheckpointFn = std::function<void(const TrainState&, Phase, int epoch)>;

    Trainer(TrainState state, std::vector<TestSample> train_set,
            std::vector<TestSample> val_set);

    TrainState& state() { return state_; }
    const std::vector<EpochRecord>& records() const { return records_; }

    /// Run from the state's current position to the configured epoch
    /// budget (a fresh state runs everything; a restored one continues).
    void run(const EpochFn& on_epoch = nullptr, const CheckpointFn& on_checkpoint = nullptr);

    EpochRecord run_pretrain_epoch();
    EpochRecord run_joint_epoch();

private:
    std::vector<int> epoch_order(int count, int epoch_index) const;
    void validate_into(EpochRecord& rec);

    TrainState state_;
    std::vector<TestSample> train_;
    std::vector<TestSample> val_;
    std::vector<EpochRecord> records_;
    std::vector<double> dense_angles_;
};

}  // namespace deer
