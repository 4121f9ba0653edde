#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "adams/tensor.hpp"

namespace adams {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numeric values double as the checkpoint `kind` byte; 0 is reserved for model parameters.
enum class OptimizerKind : std::uint8_t {
    kAdamS = 1,
    kAdamW = 2,
    kLion = 3,
    kSgdMomentum = 4,
    kAdamMini = 5,
};

std::string_view to_string(OptimizerKind kind) noexcept;
OptimizerKind parse_optimizer_kind(std::string_view name);

struct HyperParams {
    double beta1 = 0.9;
    double beta2 = 0.95;
    double weight_decay = 0.1;
    double epsilon = 1e-8;
    double peak_lr = 6e-4;
    std::optional<double> clip_threshold = 1.0;  // nullopt disables clipping
    /// AdamW only. Off by default to match the printed update rule; exposed for comparison.
    bool bias_correction = false;

    void validate() const;

    /// Lion's recommended transfer from an AdamW setting: lr x0.1, weight decay x10, betas (0.95, 0.98).
    static HyperParams lion_from_adamw(const HyperParams& adamw);

    friend bool operator==(const HyperParams&, const HyperParams&) = default;
};

/// Linear warmup from 0 to peak, then cosine decay to final_lr_fraction * peak at total_steps.
struct Schedule {
    std::int64_t warmup_steps = 0;
    std::int64_t total_steps = 1;
    double final_lr_fraction = 0.1;

    void validate() const;
    friend bool operator==(const Schedule&, const Schedule&) = default;
};

double lr_at(std::int64_t t, const Schedule& schedule, double peak);

// ---------------------------------------------------------------------------
// Per-tensor optimizer states. Step functions are pure: state in, state out.

struct AdamSState {
    Tensor m;
    std::int64_t step = 0;
    static AdamSState zeros_like(const Tensor& param) { return {Tensor::zeros_like(param), 0}; }
};

struct AdamWState {
    Tensor m;
    Tensor v;
    std::int64_t step = 0;
    static AdamWState zeros_like(const Tensor& param) {
        return {Tensor::zeros_like(param), Tensor::zeros_like(param), 0};
    }
};

struct LionState {
    Tensor m;
    std::int64_t step = 0;
    static LionState zeros_like(const Tensor& param) { return {Tensor::zeros_like(param), 0}; }
};

struct SgdmState {
    Tensor m;
    std::int64_t step = 0;
    static SgdmState zeros_like(const Tensor& param) { return {Tensor::zeros_like(param), 0}; }
};

/// Half-open flat index range [begin, end) of one parameter tensor.
struct IndexRange {
    std::string name;
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const noexcept { return end - begin; }
    friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct AdamMiniState {
    Tensor m;
    std::vector<IndexRange> blocks;
    std::vector<double> v;  // one second-moment scalar per block
    std::int64_t step = 0;

    /// Validates that `blocks` is a disjoint cover of the tensor; empty means a single block.
    static AdamMiniState create(const Tensor& param, std::vector<IndexRange> blocks = {});
};

template <class State>
struct StepResult {
    Tensor w;
    State state;
};

StepResult<AdamSState> adams_step(const Tensor& w, const Tensor& g, const AdamSState& s, const HyperParams& h,
                                  double lr);
StepResult<AdamWState> adamw_step(const Tensor& w, const Tensor& g, const AdamWState& s, const HyperParams& h,
                                  double lr);
StepResult<LionState> lion_step(const Tensor& w, const Tensor& g, const LionState& s, const HyperParams& h,
                                double lr);
StepResult<SgdmState> sgdm_step(const Tensor& w, const Tensor& g, const SgdmState& s, const HyperParams& h,
                                double lr);
StepResult<AdamMiniState> adam_mini_step(const Tensor& w, const Tensor& g, const AdamMiniState& s,
                                         const HyperParams& h, double lr);

/// max{beta1/sqrt(beta2), (1-beta1)/sqrt(1-beta2)}: the per-coordinate factor of the published
/// AdamS update-norm lemma.
double lemma_update_factor(double beta1, double beta2) noexcept;
/// sqrt(beta1^2/beta2 + (1-beta1)^2/(1-beta2)): the exact supremum of
/// |beta1 m + (1-beta1) g| / sqrt(beta2 m^2 + (1-beta2) g^2) over (m, g) (Cauchy-Schwarz).
double cauchy_schwarz_update_factor(double beta1, double beta2) noexcept;

/// lr * sqrt(d) * lemma_update_factor. Not a valid bound for every state; see
/// cauchy_schwarz_update_norm_bound.
double update_norm_bound(const HyperParams& h, double lr, std::size_t d);
double cauchy_schwarz_update_norm_bound(const HyperParams& h, double lr, std::size_t d);

struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;
    double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
    friend bool operator==(const Rational&, const Rational&) = default;
};

struct MemoryFootprint {
    std::int64_t state_scalars = 0;
    Rational ratio_vs_adamw;
};

/// Persistent optimizer-state scalars. `blocks_per_tensor` is only read for Adam-mini (defaults to
/// one block per tensor).
MemoryFootprint memory_footprint(OptimizerKind kind, std::span<const std::int64_t> param_counts,
                                 std::span<const std::int64_t> blocks_per_tensor = {});

}  // namespace adams
