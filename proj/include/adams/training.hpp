#pragma once

#include <cstdint>
#include <vector>

#include "adams/corpus.hpp"
#include "adams/optim.hpp"
#include "adams/optimizer.hpp"
#include "adams/tiny_lm.hpp"
#include "adams/trajectory.hpp"

namespace adams {

struct TrainConfig {
    TinyLmConfig model;
    CorpusOptions corpus;
    std::uint64_t corpus_seed = 1;
    std::size_t corpus_length = 100'000;
    double val_fraction = 0.1;

    OptimizerKind optimizer = OptimizerKind::kAdamS;
    HyperParams hyper{.peak_lr = 3e-3};
    std::int64_t steps = 300;
    std::int64_t warmup_steps = 30;
    double final_lr_fraction = 0.1;
    std::size_t batch_size = 64;
    std::size_t eval_size = 2048;

    std::uint64_t seed = 7;
    std::int64_t record_stride = 1;
    unsigned threads = 1;

    void validate() const;
    /// Only meaningful when steps > 0.
    Schedule schedule() const;
    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Gradient shards are fixed in number; they run on `threads` workers and are reduced in shard order,
/// so results do not depend on the thread count.
inline constexpr std::size_t kGradientShards = 8;

/// Model, data streams and evaluation sets for one configuration. Optimizers are owned by callers so
/// that several can observe the same gradient stream.
class TrainingSession {
public:
    explicit TrainingSession(const TrainConfig& config);

    struct Gradients {
        std::int64_t step = 0;
        double lr = 0.0;
        double loss = 0.0;
        double grad_norm = 0.0;  // before clipping
        ClipResult clip;
        std::vector<Tensor> grads;  // after clipping
    };

    /// Loss and (clipped) gradient on the training batch of step t (1-based) at the current parameters.
    Gradients gradients(std::int64_t t) const;
    /// Learning rate of step t for a given peak.
    double lr(std::int64_t t, double peak) const;

    double train_loss() const { return model_.loss(train_eval_); }
    double val_loss() const { return model_.loss(val_eval_); }

    TinyLm& model() noexcept { return model_; }
    const TinyLm& model() const noexcept { return model_; }
    const TrainConfig& config() const noexcept { return config_; }
    const SynthCorpus& corpus() const noexcept { return corpus_; }

private:
    TrainConfig config_;
    SynthCorpus corpus_;
    std::vector<Token> train_stream_;
    std::vector<Token> val_stream_;
    Batch train_eval_;
    Batch val_eval_;
    TinyLm model_;
};

struct TrainResult {
    TrajectoryRecord trajectory;
    double init_train_loss = 0.0;
    double init_val_loss = 0.0;
    double final_train_loss = 0.0;
    double final_val_loss = 0.0;
    std::int64_t steps_completed = 0;
    bool diverged = false;
    std::vector<Tensor> params;
    std::vector<Tensor> optimizer_state;
};

/// Divergence (non-finite values, or a batch loss above 10x the initial evaluation loss) stops the run.
TrainResult train(const TrainConfig& config);

}  // namespace adams
