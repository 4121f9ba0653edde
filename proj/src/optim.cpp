#include "adams/optim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

namespace adams {

namespace {

constexpr std::array<std::pair<OptimizerKind, std::string_view>, 5> kKindNames{{
    {OptimizerKind::kAdamS, "adams"},
    {OptimizerKind::kAdamW, "adamw"},
    {OptimizerKind::kLion, "lion"},
    {OptimizerKind::kSgdMomentum, "sgdm"},
    {OptimizerKind::kAdamMini, "adam_mini"},
}};

void check_step_inputs(const Tensor& w, const Tensor& g, const Tensor& m, const char* who) {
    require_same_shape(w, g, who);
    require_same_shape(w, m, who);
    if (!g.all_finite()) throw NonFiniteError(std::string(who) + ": non-finite gradient, step rejected");
}

}  // namespace

std::string_view to_string(OptimizerKind kind) noexcept {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) return name;
    }
    return "unknown";
}

OptimizerKind parse_optimizer_kind(std::string_view name) {
    for (const auto& [k, n] : kKindNames) {
        if (n == name) return k;
    }
    throw ConfigError("unknown optimizer kind '" + std::string(name) +
                      "' (expected adams, adamw, lion, sgdm or adam_mini)");
}

void HyperParams::validate() const {
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1 must lie in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must lie in [0, 1)");
    if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
    if (!(peak_lr > 0.0)) throw ConfigError("peak_lr must be > 0");
    if (clip_threshold && !(*clip_threshold > 0.0)) throw ConfigError("clip_threshold must be > 0 or null");
}

HyperParams HyperParams::lion_from_adamw(const HyperParams& adamw) {
    HyperParams h = adamw;
    h.beta1 = 0.95;
    h.beta2 = 0.98;
    h.peak_lr = 0.1 * adamw.peak_lr;
    h.weight_decay = 10.0 * adamw.weight_decay;
    h.bias_correction = false;
    return h;
}

void Schedule::validate() const {
    if (warmup_steps < 0) throw ConfigError("warmup_steps must be >= 0");
    if (total_steps <= warmup_steps) throw ConfigError("total_steps must exceed warmup_steps");
    if (!(final_lr_fraction > 0.0 && final_lr_fraction <= 1.0)) {
        throw ConfigError("final_lr_fraction must lie in (0, 1]");
    }
}

double lr_at(std::int64_t t, const Schedule& schedule, double peak) {
    schedule.validate();
    if (t < 0 || t > schedule.total_steps) {
        throw std::out_of_range("lr_at: step " + std::to_string(t) + " outside [0, " +
                                std::to_string(schedule.total_steps) + "]");
    }
    if (t < schedule.warmup_steps) {
        return peak * static_cast<double>(t) / static_cast<double>(schedule.warmup_steps);
    }
    double progress = static_cast<double>(t - schedule.warmup_steps) /
                      static_cast<double>(schedule.total_steps - schedule.warmup_steps);
    double frac = schedule.final_lr_fraction;
    return peak * (frac + (1.0 - frac) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress)));
}

AdamMiniState AdamMiniState::create(const Tensor& param, std::vector<IndexRange> blocks) {
    if (blocks.empty()) blocks.push_back({"all", 0, param.size()});
    std::sort(blocks.begin(), blocks.end(), [](const IndexRange& a, const IndexRange& b) { return a.begin < b.begin; });
    std::size_t expected = 0;
    for (const auto& b : blocks) {
        if (b.end <= b.begin) throw ConfigError("adam-mini block '" + b.name + "' is empty");
        if (b.begin != expected) {
            throw ConfigError("adam-mini blocks must be a disjoint cover; gap or overlap at index " +
                              std::to_string(std::min(b.begin, expected)));
        }
        expected = b.end;
    }
    if (expected != param.size()) {
        throw ConfigError("adam-mini blocks cover " + std::to_string(expected) + " of " +
                          std::to_string(param.size()) + " indices");
    }
    AdamMiniState s;
    s.m = Tensor::zeros_like(param);
    s.v.assign(blocks.size(), 0.0);
    s.blocks = std::move(blocks);
    return s;
}

StepResult<AdamSState> adams_step(const Tensor& w, const Tensor& g, const AdamSState& s, const HyperParams& h,
                                  double lr) {
    check_step_inputs(w, g, s.m, "adams_step");
    StepResult<AdamSState> out{Tensor::zeros_like(w), {Tensor::zeros_like(w), s.step + 1}};
    auto wi = w.data();
    auto gi = g.data();
    auto mi = s.m.data();
    auto wo = out.w.data();
    auto mo = out.state.m.data();
    const double decay = 1.0 - lr * h.weight_decay;
    for (std::size_t i = 0; i < wi.size(); ++i) {
        // The denominator uses the momentum from before this step's update.
        double nu = h.beta2 * (mi[i] * mi[i]) + (1.0 - h.beta2) * (gi[i] * gi[i]);
        mo[i] = h.beta1 * mi[i] + (1.0 - h.beta1) * gi[i];
        wo[i] = decay * wi[i] - lr * (mo[i] / (std::sqrt(nu) + h.epsilon));
    }
    return out;
}

StepResult<AdamWState> adamw_step(const Tensor& w, const Tensor& g, const AdamWState& s, const HyperParams& h,
                                  double lr) {
    check_step_inputs(w, g, s.m, "adamw_step");
    require_same_shape(w, s.v, "adamw_step");
    StepResult<AdamWState> out{Tensor::zeros_like(w),
                               {Tensor::zeros_like(w), Tensor::zeros_like(w), s.step + 1}};
    auto wi = w.data();
    auto gi = g.data();
    auto mi = s.m.data();
    auto vi = s.v.data();
    auto wo = out.w.data();
    auto mo = out.state.m.data();
    auto vo = out.state.v.data();
    const double decay = 1.0 - lr * h.weight_decay;
    const double t = static_cast<double>(out.state.step);
    const double m_corr = h.bias_correction ? 1.0 - std::pow(h.beta1, t) : 1.0;
    const double v_corr = h.bias_correction ? 1.0 - std::pow(h.beta2, t) : 1.0;
    for (std::size_t i = 0; i < wi.size(); ++i) {
        vo[i] = h.beta2 * vi[i] + (1.0 - h.beta2) * (gi[i] * gi[i]);
        mo[i] = h.beta1 * mi[i] + (1.0 - h.beta1) * gi[i];
        if (h.bias_correction) {
            wo[i] = decay * wi[i] - lr * ((mo[i] / m_corr) / (std::sqrt(vo[i] / v_corr) + h.epsilon));
        } else {
            wo[i] = decay * wi[i] - lr * (mo[i] / (std::sqrt(vo[i]) + h.epsilon));
        }
    }
    return out;
}

StepResult<LionState> lion_step(const Tensor& w, const Tensor& g, const LionState& s, const HyperParams& h,
                                double lr) {
    check_step_inputs(w, g, s.m, "lion_step");
    StepResult<LionState> out{Tensor::zeros_like(w), {Tensor::zeros_like(w), s.step + 1}};
    auto wi = w.data();
    auto gi = g.data();
    auto mi = s.m.data();
    auto wo = out.w.data();
    auto mo = out.state.m.data();
    for (std::size_t i = 0; i < wi.size(); ++i) {
        double u = h.beta1 * mi[i] + (1.0 - h.beta1) * gi[i];
        wo[i] = wi[i] - lr * (sign(u) + h.weight_decay * wi[i]);
        mo[i] = h.beta2 * mi[i] + (1.0 - h.beta2) * gi[i];
    }
    return out;
}

StepResult<SgdmState> sgdm_step(const Tensor& w, const Tensor& g, const SgdmState& s, const HyperParams& h,
                                double lr) {
    check_step_inputs(w, g, s.m, "sgdm_step");
    StepResult<SgdmState> out{Tensor::zeros_like(w), {Tensor::zeros_like(w), s.step + 1}};
    auto wi = w.data();
    auto gi = g.data();
    auto mi = s.m.data();
    auto wo = out.w.data();
    auto mo = out.state.m.data();
    const double decay = 1.0 - lr * h.weight_decay;
    for (std::size_t i = 0; i < wi.size(); ++i) {
        mo[i] = h.beta1 * mi[i] + (1.0 - h.beta1) * gi[i];
        wo[i] = decay * wi[i] - lr * mo[i];
    }
    return out;
}

StepResult<AdamMiniState> adam_mini_step(const Tensor& w, const Tensor& g, const AdamMiniState& s,
                                         const HyperParams& h, double lr) {
    check_step_inputs(w, g, s.m, "adam_mini_step");
    if (s.v.size() != s.blocks.size()) throw ConfigError("adam-mini state has mismatched block/v counts");
    StepResult<AdamMiniState> out{Tensor::zeros_like(w), s};
    out.state.step = s.step + 1;
    const double t = static_cast<double>(out.state.step);
    const double m_corr = 1.0 - std::pow(h.beta1, t);
    const double v_corr = 1.0 - std::pow(h.beta2, t);
    auto wi = w.data();
    auto gi = g.data();
    auto mi = s.m.data();
    auto wo = out.w.data();
    auto mo = out.state.m.data();
    for (std::size_t b = 0; b < s.blocks.size(); ++b) {
        const auto& block = s.blocks[b];
        double mean_sq = 0.0;
        for (std::size_t i = block.begin; i < block.end; ++i) mean_sq += gi[i] * gi[i];
        mean_sq /= static_cast<double>(block.size());
        double v = (1.0 - h.beta2) * mean_sq + h.beta2 * s.v[b];
        out.state.v[b] = v;
        double denom = std::sqrt(v / v_corr) + h.epsilon;
        for (std::size_t i = block.begin; i < block.end; ++i) {
            double decayed = wi[i] - lr * h.weight_decay * wi[i];
            mo[i] = (1.0 - h.beta1) * gi[i] + h.beta1 * mi[i];
            wo[i] = decayed - lr * ((mo[i] / m_corr) / denom);
        }
    }
    return out;
}

double lemma_update_factor(double beta1, double beta2) noexcept {
    double momentum_arm = beta1 == 0.0 ? 0.0 : beta1 / std::sqrt(beta2);
    double gradient_arm = (1.0 - beta1) / std::sqrt(1.0 - beta2);
    return std::max(momentum_arm, gradient_arm);
}

double cauchy_schwarz_update_factor(double beta1, double beta2) noexcept {
    double momentum_arm = beta1 == 0.0 ? 0.0 : beta1 * beta1 / beta2;
    double gradient_arm = (1.0 - beta1) * (1.0 - beta1) / (1.0 - beta2);
    return std::sqrt(momentum_arm + gradient_arm);
}

double update_norm_bound(const HyperParams& h, double lr, std::size_t d) {
    if (d == 0) throw std::invalid_argument("update_norm_bound: d must be >= 1");
    return lr * std::sqrt(static_cast<double>(d)) * lemma_update_factor(h.beta1, h.beta2);
}

double cauchy_schwarz_update_norm_bound(const HyperParams& h, double lr, std::size_t d) {
    if (d == 0) throw std::invalid_argument("cauchy_schwarz_update_norm_bound: d must be >= 1");
    return lr * std::sqrt(static_cast<double>(d)) * cauchy_schwarz_update_factor(h.beta1, h.beta2);
}

MemoryFootprint memory_footprint(OptimizerKind kind, std::span<const std::int64_t> param_counts,
                                 std::span<const std::int64_t> blocks_per_tensor) {
    if (param_counts.empty()) throw std::invalid_argument("memory_footprint: empty parameter list");
    std::int64_t total = 0;
    for (auto d : param_counts) {
        if (d <= 0) throw std::invalid_argument("memory_footprint: parameter counts must be positive");
        total += d;
    }
    MemoryFootprint fp;
    switch (kind) {
        case OptimizerKind::kAdamW: fp.state_scalars = 2 * total; break;
        case OptimizerKind::kAdamS:
        case OptimizerKind::kLion:
        case OptimizerKind::kSgdMomentum: fp.state_scalars = total; break;
        case OptimizerKind::kAdamMini: {
            std::int64_t blocks = static_cast<std::int64_t>(param_counts.size());
            if (!blocks_per_tensor.empty()) {
                if (blocks_per_tensor.size() != param_counts.size()) {
                    throw std::invalid_argument("memory_footprint: one block count per tensor required");
                }
                blocks = std::accumulate(blocks_per_tensor.begin(), blocks_per_tensor.end(), std::int64_t{0});
            }
            fp.state_scalars = total + blocks;
            break;
        }
    }
    std::int64_t den = 2 * total;
    std::int64_t g = std::gcd(fp.state_scalars, den);
    fp.ratio_vs_adamw = {fp.state_scalars / g, den / g};
    return fp;
}

}  // namespace adams
