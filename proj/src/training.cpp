#include "adams/training.hpp"

#include <cmath>
#include <stdexcept>

#include "adams/parallel.hpp"
#include "adams/random.hpp"

namespace adams {

namespace {

constexpr std::uint64_t kBatchTag = 21;
constexpr std::uint64_t kTrainEvalTag = 22;
constexpr std::uint64_t kValEvalTag = 23;

Batch eval_batch(const std::vector<Token>& stream, std::size_t context, std::size_t size, std::uint64_t seed) {
    CounterRng rng(seed, 0);
    return sample_batch(stream, context, size, rng);
}

Batch slice(const Batch& b, std::size_t begin, std::size_t end) {
    Batch out;
    out.context = b.context;
    out.contexts.assign(b.contexts.begin() + static_cast<std::ptrdiff_t>(begin * b.context),
                        b.contexts.begin() + static_cast<std::ptrdiff_t>(end * b.context));
    out.targets.assign(b.targets.begin() + static_cast<std::ptrdiff_t>(begin),
                       b.targets.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
}

}  // namespace

void TrainConfig::validate() const {
    model.validate();
    hyper.validate();
    if (steps < 0) throw ConfigError("steps must be >= 0");
    if (warmup_steps < 0) throw ConfigError("warmup_steps must be >= 0");
    if (steps > 0 && warmup_steps >= steps) throw ConfigError("warmup_steps must be smaller than steps");
    if (!(final_lr_fraction > 0.0 && final_lr_fraction <= 1.0)) throw ConfigError("final_lr_fraction must lie in (0, 1]");
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (eval_size == 0) throw ConfigError("eval_size must be positive");
    if (record_stride < 1) throw ConfigError("record_stride must be >= 1");
    if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw ConfigError("val_fraction must lie in (0, 1)");
    if (corpus.vocab != model.vocab) throw ConfigError("corpus vocab must equal model vocab");
    auto val_len = static_cast<std::size_t>(val_fraction * static_cast<double>(corpus_length));
    if (val_len < model.context + 1 || corpus_length - val_len < model.context + 1) {
        throw ConfigError("corpus_length too short for the context length");
    }
}

Schedule TrainConfig::schedule() const { return Schedule{warmup_steps, steps, final_lr_fraction}; }

TrainingSession::TrainingSession(const TrainConfig& config)
    : config_((config.validate(), config)),
      corpus_(gen_corpus(config.corpus_seed, config.corpus_length, config.corpus)),
      model_(TinyLm::init(config.model, config.seed)) {
    auto val_len = static_cast<std::size_t>(config_.val_fraction * static_cast<double>(config_.corpus_length));
    auto split = corpus_.tokens.begin() + static_cast<std::ptrdiff_t>(corpus_.tokens.size() - val_len);
    train_stream_.assign(corpus_.tokens.begin(), split);
    val_stream_.assign(split, corpus_.tokens.end());
    train_eval_ = eval_batch(train_stream_, config_.model.context, config_.eval_size,
                             derive_seed(config_.corpus_seed, kTrainEvalTag));
    val_eval_ = eval_batch(val_stream_, config_.model.context, config_.eval_size,
                           derive_seed(config_.corpus_seed, kValEvalTag));
}

double TrainingSession::lr(std::int64_t t, double peak) const { return lr_at(t, config_.schedule(), peak); }

TrainingSession::Gradients TrainingSession::gradients(std::int64_t t) const {
    if (t < 1) throw std::out_of_range("TrainingSession::gradients: steps are 1-based");
    CounterRng rng(derive_seed(config_.seed, kBatchTag), static_cast<std::uint64_t>(t));
    Batch batch = sample_batch(train_stream_, config_.model.context, config_.batch_size, rng);

    const std::size_t B = batch.size();
    const std::size_t shards = std::min(kGradientShards, B);
    std::vector<double> shard_loss(shards);
    std::vector<std::vector<Tensor>> shard_grads(shards);
    parallel_for(shards, config_.threads, [&](std::size_t s) {
        Batch part = slice(batch, B * s / shards, B * (s + 1) / shards);
        auto fwd = model_.forward_loss(part);
        shard_loss[s] = fwd.loss;
        shard_grads[s] = model_.backward(fwd.cache);
    });

    Gradients out;
    out.step = t;
    out.grads.reserve(model_.params().size());
    for (const auto& p : model_.params()) out.grads.push_back(Tensor::zeros_like(p));
    for (std::size_t s = 0; s < shards; ++s) {
        double w = static_cast<double>(B * (s + 1) / shards - B * s / shards) / static_cast<double>(B);
        out.loss += w * shard_loss[s];
        for (std::size_t i = 0; i < out.grads.size(); ++i) {
            auto dst = out.grads[i].data();
            auto src = shard_grads[s][i].data();
            for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += w * src[j];
        }
    }
    out.grad_norm = global_norm(out.grads);
    if (config_.hyper.clip_threshold && std::isfinite(out.grad_norm)) {
        out.clip = clip_by_global_norm(out.grads, *config_.hyper.clip_threshold);
    } else {
        out.clip.norm_before = out.grad_norm;
    }
    out.lr = config_.steps > 0 ? lr(t, config_.hyper.peak_lr) : 0.0;
    return out;
}

TrainResult train(const TrainConfig& config) {
    TrainingSession session(config);
    TrainResult res;
    res.trajectory.groups = {};
    res.init_train_loss = session.train_loss();
    res.init_val_loss = session.val_loss();
    Optimizer opt(config.optimizer, config.hyper, session.model().params());
    const double limit = 10.0 * res.init_train_loss;

    for (std::int64_t t = 1; t <= config.steps; ++t) {
        auto g = session.gradients(t);
        if (!std::isfinite(g.loss) || g.loss > limit || !std::isfinite(g.grad_norm)) {
            res.diverged = true;
            break;
        }
        std::vector<Tensor> delta;
        try {
            delta = opt.step(session.model().mutable_params(), g.grads, g.lr);
        } catch (const NonFiniteError&) {
            res.diverged = true;
            break;
        }
        res.steps_completed = t;
        if (t % config.record_stride == 0 || t == config.steps) {
            TrajectoryRow row;
            row.step = t;
            row.lr = g.lr;
            row.loss = g.loss;
            row.grad_norm = g.grad_norm;
            row.update_norm = global_norm(delta);
            row.clip_scale = g.clip.scale;
            res.trajectory.append(std::move(row));
        }
    }
    if (res.diverged) {
        res.trajectory.diverged = true;
        res.trajectory.note = "diverged at step " + std::to_string(res.steps_completed + 1);
    }
    res.final_train_loss = session.train_loss();
    res.final_val_loss = session.val_loss();
    if (!std::isfinite(res.final_train_loss) || !std::isfinite(res.final_val_loss)) res.diverged = true;
    res.params = session.model().params();
    res.optimizer_state = opt.state_tensors();
    return res;
}

}  // namespace adams
