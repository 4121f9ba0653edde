#include "adams/optimizer.hpp"

namespace adams {

Optimizer::Optimizer(OptimizerKind kind, HyperParams hyper, std::span<const Tensor> params,
                     const AdamMiniPartition& partition)
    : kind_(kind), hyper_(hyper) {
    hyper_.validate();
    if (!partition.empty() && partition.size() != params.size()) {
        throw ConfigError("adam-mini partition must list blocks for every parameter tensor");
    }
    states_.reserve(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Tensor& p = params[i];
        switch (kind) {
            case OptimizerKind::kAdamS: states_.emplace_back(AdamSState::zeros_like(p)); break;
            case OptimizerKind::kAdamW: states_.emplace_back(AdamWState::zeros_like(p)); break;
            case OptimizerKind::kLion: states_.emplace_back(LionState::zeros_like(p)); break;
            case OptimizerKind::kSgdMomentum: states_.emplace_back(SgdmState::zeros_like(p)); break;
            case OptimizerKind::kAdamMini:
                states_.emplace_back(AdamMiniState::create(p, partition.empty() ? std::vector<IndexRange>{}
                                                                                : partition[i]));
                break;
        }
    }
}

std::vector<Tensor> Optimizer::step(std::vector<Tensor>& params, std::span<const Tensor> grads, double lr) {
    if (params.size() != states_.size() || grads.size() != states_.size()) {
        throw DimensionError("optimizer step: expected " + std::to_string(states_.size()) + " tensors");
    }
    std::vector<Tensor> new_params;
    std::vector<ParamState> new_states;
    new_params.reserve(params.size());
    new_states.reserve(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        std::visit(
            [&](const auto& s) {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, AdamSState>) {
                    auto r = adams_step(params[i], grads[i], s, hyper_, lr);
                    new_params.push_back(std::move(r.w));
                    new_states.emplace_back(std::move(r.state));
                } else if constexpr (std::is_same_v<S, AdamWState>) {
                    auto r = adamw_step(params[i], grads[i], s, hyper_, lr);
                    new_params.push_back(std::move(r.w));
                    new_states.emplace_back(std::move(r.state));
                } else if constexpr (std::is_same_v<S, LionState>) {
                    auto r = lion_step(params[i], grads[i], s, hyper_, lr);
                    new_params.push_back(std::move(r.w));
                    new_states.emplace_back(std::move(r.state));
                } else if constexpr (std::is_same_v<S, SgdmState>) {
                    auto r = sgdm_step(params[i], grads[i], s, hyper_, lr);
                    new_params.push_back(std::move(r.w));
                    new_states.emplace_back(std::move(r.state));
                } else {
                    auto r = adam_mini_step(params[i], grads[i], s, hyper_, lr);
                    new_params.push_back(std::move(r.w));
                    new_states.emplace_back(std::move(r.state));
                }
            },
            states_[i]);
    }
    std::vector<Tensor> deltas;
    deltas.reserve(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        deltas.push_back(elementwise(ElementwiseOp::kSub, new_params[i], params[i]));
        params[i] = std::move(new_params[i]);
    }
    states_ = std::move(new_states);
    ++step_count_;
    return deltas;
}

std::int64_t Optimizer::state_scalar_count() const noexcept {
    std::int64_t n = 0;
    for (const auto& st : states_) {
        std::visit(
            [&](const auto& s) {
                using S = std::decay_t<decltype(s)>;
                n += static_cast<std::int64_t>(s.m.size());
                if constexpr (std::is_same_v<S, AdamWState>) n += static_cast<std::int64_t>(s.v.size());
                if constexpr (std::is_same_v<S, AdamMiniState>) n += static_cast<std::int64_t>(s.v.size());
            },
            st);
    }
    return n;
}

std::vector<Tensor> Optimizer::state_tensors() const {
    std::vector<Tensor> out;
    for (const auto& st : states_) {
        std::visit(
            [&](const auto& s) {
                using S = std::decay_t<decltype(s)>;
                out.push_back(s.m);
                if constexpr (std::is_same_v<S, AdamWState>) out.push_back(s.v);
                if constexpr (std::is_same_v<S, AdamMiniState>) out.emplace_back(Shape{s.v.size()}, s.v);
            },
            st);
    }
    return out;
}

void Optimizer::restore(std::int64_t step, std::span<const Tensor> tensors) {
    std::size_t next = 0;
    auto take = [&](const Tensor& like) -> const Tensor& {
        if (next >= tensors.size()) throw DimensionError("optimizer restore: too few state tensors");
        const Tensor& t = tensors[next++];
        require_same_shape(like, t, "optimizer restore");
        return t;
    };
    std::vector<ParamState> restored = states_;
    for (auto& st : restored) {
        std::visit(
            [&](auto& s) {
                using S = std::decay_t<decltype(s)>;
                s.m = take(s.m);
                s.step = step;
                if constexpr (std::is_same_v<S, AdamWState>) s.v = take(s.v);
                if constexpr (std::is_same_v<S, AdamMiniState>) {
                    const Tensor& v = take(Tensor(Shape{s.v.size()}));
                    s.v.assign(v.data().begin(), v.data().end());
                }
            },
            st);
    }
    if (next != tensors.size()) throw DimensionError("optimizer restore: too many state tensors");
    states_ = std::move(restored);
    step_count_ = step;
}

}  // namespace adams
