#pragma once

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "adams/optim.hpp"

namespace adams {

using ParamState = std::variant<AdamSState, AdamWState, LionState, SgdmState, AdamMiniState>;

/// Adam-mini partition: per parameter tensor, a list of index blocks (empty = whole tensor).
using AdamMiniPartition = std::vector<std::vector<IndexRange>>;

/// Steps a list of parameter tensors with one algorithm. Holds one state per tensor and
/// dispatches to the pure step functions.
class Optimizer {
public:
    Optimizer(OptimizerKind kind, HyperParams hyper, std::span<const Tensor> params,
              const AdamMiniPartition& partition = {});

    /// Applies one step in place and returns the per-tensor update w' - w.
    /// On a non-finite gradient nothing is modified and NonFiniteError is thrown.
    std::vector<Tensor> step(std::vector<Tensor>& params, std::span<const Tensor> grads, double lr);

    OptimizerKind kind() const noexcept { return kind_; }
    const HyperParams& hyper() const noexcept { return hyper_; }
    std::int64_t step_count() const noexcept { return step_count_; }
    const std::vector<ParamState>& states() const noexcept { return states_; }

    /// Persistent state scalars actually held (m, v and per-block scalars).
    std::int64_t state_scalar_count() const noexcept;

    /// State tensors in checkpoint order: per parameter, m then (AdamW) v or (Adam-mini) block v.
    std::vector<Tensor> state_tensors() const;
    /// Restores from tensors produced by state_tensors(); shapes must match.
    void restore(std::int64_t step, std::span<const Tensor> tensors);

private:
    OptimizerKind kind_;
    HyperParams hyper_;
    std::vector<ParamState> states_;
    std::int64_t step_count_ = 0;
};

}  // namespace adams
