#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "adams/corpus.hpp"
#include "adams/tensor.hpp"

namespace adams {

class StaleCacheError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct TinyLmConfig {
    std::size_t vocab = 16;
    std::size_t context = 8;
    std::size_t embed = 16;
    std::size_t hidden = 64;

    void validate() const;
    /// V e + k e h + h + h V + V
    std::size_t param_count() const noexcept;
    friend bool operator==(const TinyLmConfig&, const TinyLmConfig&) = default;
};

/// Flattened-context MLP: logits = tanh(concat(E[x_1..x_k]) W1 + b1) W2 + b2.
class TinyLm {
public:
    enum Param : std::size_t { kEmbedding = 0, kHiddenW, kHiddenB, kOutputW, kOutputB, kParamCount };
    static const std::vector<std::string>& param_names();

    /// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] (fan_in = V for the embedding), biases zero.
    static TinyLm init(const TinyLmConfig& config, std::uint64_t seed);
    /// Adopts existing parameters; shapes must match the config.
    TinyLm(const TinyLmConfig& config, std::vector<Tensor> params);

    struct Cache {
        std::uint64_t model_id = 0;
        std::uint64_t generation = 0;
        Batch batch;
        std::vector<double> inputs;  // B x (k e)
        std::vector<double> hidden;  // B x h, post-tanh
        std::vector<double> probs;   // B x V
    };

    struct Forward {
        double loss = 0.0;
        Cache cache;
    };

    /// Mean cross-entropy of the targets.
    Forward forward_loss(const Batch& batch) const;
    double loss(const Batch& batch) const { return forward_loss(batch).loss; }
    /// Gradients of the mean cross-entropy, in parameter order.
    /// Throws StaleCacheError when the parameters changed since the cache was produced.
    std::vector<Tensor> backward(const Cache& cache) const;

    const TinyLmConfig& config() const noexcept { return config_; }
    const std::vector<Tensor>& params() const noexcept { return params_; }
    /// Mutable access invalidates outstanding caches.
    std::vector<Tensor>& mutable_params() noexcept {
        ++generation_;
        return params_;
    }
    std::uint64_t generation() const noexcept { return generation_; }

    /// FNV-1a over the raw parameter bytes.
    std::uint64_t checksum() const noexcept;

private:
    TinyLmConfig config_;
    std::vector<Tensor> params_;
    std::uint64_t id_ = 0;
    std::uint64_t generation_ = 0;
};

}  // namespace adams
