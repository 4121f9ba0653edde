#include "adams/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "adams/optimizer.hpp"
#include "adams/random.hpp"

namespace adams::theory {

namespace {

constexpr double kCoshArgLimit = 700.0;
constexpr double kFdStep = 1e-5;

double distance(const Tensor& a, const Tensor& b) { return norm(elementwise(ElementwiseOp::kSub, a, b)); }

// Largest singular value of the Hessian at w by power iteration on symmetric-difference Hessian-vector products.
double local_hessian_norm(const Objective& obj, const Tensor& w) {
    Tensor v = Tensor::zeros_like(w);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / std::sqrt(static_cast<double>(v.size())) * (i % 2 ? -1.0 : 1.0);
    double estimate = 0.0;
    for (int it = 0; it < 30; ++it) {
        Tensor hv = elementwise(ElementwiseOp::kSub, obj.evaluate(axpy(kFdStep, v, w)).grad,
                                obj.evaluate(axpy(-kFdStep, v, w)).grad);
        double n = norm(hv) / (2.0 * kFdStep);
        estimate = n;
        if (n == 0.0) break;
        v = elementwise(ElementwiseOp::kDiv, hv, norm(hv));
    }
    return estimate;
}

}  // namespace

void SmoothnessParams::validate() const {
    if (!(L0 > 0.0) || !(L1 > 0.0)) throw std::invalid_argument("smoothness constants must be positive");
}

void NoiseSpec::validate() const {
    if (!(R >= 0.0) || !std::isfinite(R)) throw std::invalid_argument("noise constant R must be >= 0");
}

Objective cosh_objective(std::size_t d, double a, double b) {
    if (d == 0) throw std::invalid_argument("cosh_objective: dimension must be positive");
    if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("cosh_objective: a and b must be positive");
    auto guard = [b](const Tensor& w) {
        for (double x : w.data()) {
            if (!(std::fabs(b * x) <= kCoshArgLimit)) throw DomainError("cosh_objective: |b w_i| exceeds 700");
        }
    };
    Objective obj;
    obj.name = "cosh";
    obj.dimension = d;
    obj.f_star = a * static_cast<double>(d);
    obj.certified = {std::cosh(1.0) * a * b * b, std::numbers::e * b};
    obj.evaluate = [d, a, b, guard](const Tensor& w) {
        if (w.size() != d) throw DimensionError("cosh_objective: wrong dimension");
        guard(w);
        Evaluation e{0.0, Tensor::zeros_like(w)};
        for (std::size_t i = 0; i < d; ++i) {
            e.value += std::cosh(b * w[i]);
            e.grad[i] = a * b * std::sinh(b * w[i]);
        }
        e.value *= a;
        return e;
    };
    obj.gap = [d, a, b, guard](const Tensor& w) {
        if (w.size() != d) throw DimensionError("cosh_objective: wrong dimension");
        guard(w);
        double acc = 0.0;
        for (double x : w.data()) {
            double s = std::sinh(0.5 * b * x);
            acc += s * s;
        }
        return 2.0 * a * acc;
    };
    return obj;
}

Objective quadratic_objective(std::size_t d, double curvature, double L1) {
    if (d == 0) throw std::invalid_argument("quadratic_objective: dimension must be positive");
    if (!(curvature > 0.0) || !(L1 > 0.0)) throw std::invalid_argument("quadratic_objective: constants must be positive");
    Objective obj;
    obj.name = "quadratic";
    obj.dimension = d;
    obj.f_star = 0.0;
    obj.certified = {curvature, L1};
    obj.evaluate = [d, curvature](const Tensor& w) {
        if (w.size() != d) throw DimensionError("quadratic_objective: wrong dimension");
        return Evaluation{0.5 * curvature * sum_squares(w), elementwise(ElementwiseOp::kMul, w, curvature)};
    };
    obj.gap = [d, curvature](const Tensor& w) {
        if (w.size() != d) throw DimensionError("quadratic_objective: wrong dimension");
        return 0.5 * curvature * sum_squares(w);
    };
    return obj;
}

Objective with_certificate(Objective obj, SmoothnessParams certificate, std::string name_suffix) {
    certificate.validate();
    obj.certified = certificate;
    obj.name += name_suffix;
    return obj;
}

double descent_max_lr(double L0, double L1, double grad_norm) {
    if (!(L0 > 0.0) || !(L1 >= 0.0) || !(grad_norm >= 0.0)) {
        throw std::invalid_argument("descent_max_lr: requires L0 > 0, L1 >= 0, grad_norm >= 0");
    }
    return 2.0 / (L0 + L1 * grad_norm);
}

bool reverse_pl_holds(double f_gap, double grad_norm, double L0, double L1) {
    if (!(f_gap >= 0.0)) throw std::invalid_argument("reverse_pl_holds: f_gap must be >= 0");
    return grad_norm * grad_norm <= 3.0 * (3.0 * L0 + 4.0 * L1 * grad_norm) * f_gap;
}

ProbeResult smoothness_probe(const Objective& obj, const Tensor& w1, const Tensor& w2) {
    require_same_shape(w1, w2, "smoothness_probe");
    ProbeResult r;
    double dist = distance(w1, w2);
    if (dist > 1.0 / obj.certified.L1) {
        r.applicable = false;
        return r;
    }
    Evaluation e1 = obj.evaluate(w1);
    r.bound = obj.certified.L0 + obj.certified.L1 * norm(e1.grad);
    if (dist == 0.0) {
        r.surrogate = true;
        r.ratio = local_hessian_norm(obj, w1);
    } else {
        r.ratio = distance(e1.grad, obj.evaluate(w2).grad) / dist;
    }
    r.holds = r.ratio <= r.bound + 1e-9;
    return r;
}

TheoryConstants theory_constants(const TheoryInputs& in) {
    if (!(in.delta > 0.0 && in.delta < 1.0)) throw std::invalid_argument("theory_constants: delta must lie in (0, 1)");
    if (!(in.T >= 1.0)) throw std::invalid_argument("theory_constants: T must be >= 1");
    if (!(in.L0 > 0.0) || !(in.L1 > 0.0) || !(in.L > 0.0) || !(in.R >= 0.0) || !(in.eta > 0.0) ||
        !(in.epsilon > 0.0) || !(in.f_gap >= 0.0) || in.d == 0) {
        throw std::invalid_argument("theory_constants: constants out of range");
    }
    if (!(in.beta1 >= 0.0 && in.beta1 < 1.0) || !(in.beta2 > 0.0 && in.beta2 < 1.0)) {
        throw std::invalid_argument("theory_constants: betas out of range");
    }
    TheoryConstants c;
    const double floor_arm = 3.0 * in.L0 / (4.0 * in.L1);
    c.sigma_arms = {std::sqrt(2.0 * in.R * in.R * std::log(in.T / in.delta)),
                    in.L * (in.eta / (1.0 - in.beta1)) * lemma_update_factor(in.beta1, in.beta2), floor_arm};
    c.sigma = *std::max_element(c.sigma_arms.begin(), c.sigma_arms.end());
    const double s2 = c.sigma * c.sigma;
    c.G_arms = {floor_arm, 72.0 * in.L1 * in.f_gap,
                std::sqrt(72.0 * in.L1 * s2 * in.eta * ((1.0 - in.beta1) * in.T + 1.0)),
                60.0 * std::sqrt(in.L1 * in.R * in.R * s2 * in.eta * std::sqrt(2.0 * in.T * std::log(1.0 / in.delta)))};
    c.G = *std::max_element(c.G_arms.begin(), c.G_arms.end());
    c.F = c.G * c.G / (3.0 * (3.0 * in.L0 + 4.0 * in.L1 * c.G));
    c.C = std::sqrt(4.0 * in.L * in.L * (c.G + c.sigma + in.epsilon) / std::pow(in.epsilon, 4));
    return c;
}

Tensor subgaussian_noise(std::size_t dim, double R, std::uint64_t seed, std::uint64_t index) {
    if (dim == 0) throw std::invalid_argument("subgaussian_noise: dimension must be positive");
    NoiseSpec{R}.validate();
    Tensor out(Shape{dim});
    if (R == 0.0) return out;
    CounterRng rng(seed, index);
    const double sd = R / std::sqrt(static_cast<double>(dim));
    for (double& x : out.data()) x = sd * rng.normal();
    return out;
}

std::string_view to_string(LrSchedule s) noexcept {
    return s == LrSchedule::kConstant ? "constant" : "warmup_cosine";
}

LrSchedule parse_lr_schedule(std::string_view name) {
    if (name == "constant") return LrSchedule::kConstant;
    if (name == "warmup_cosine") return LrSchedule::kWarmupCosine;
    throw ConfigError("unknown lr schedule '" + std::string(name) + "' (expected constant or warmup_cosine)");
}

ConvergenceResult convergence_experiment(const Objective& obj, OptimizerKind kind, std::int64_t T,
                                         const NoiseSpec& noise, std::uint64_t seed,
                                         const ExperimentOptions& opt) {
    if (T < 100) throw std::invalid_argument("convergence_experiment: T must be >= 100");
    noise.validate();
    if (!(opt.c_eta > 0.0) || !(opt.c_m > 0.0) || !(opt.c_v > 0.0)) {
        throw ConfigError("convergence_experiment: scaling constants must be positive");
    }
    if (!(opt.init_low >= 0.0) || !(opt.init_high >= opt.init_low)) throw ConfigError("invalid init range");
    if (opt.record_stride < 1) throw ConfigError("record_stride must be >= 1");

    const double rt = std::sqrt(static_cast<double>(T));
    ConvergenceResult res;
    res.eta = opt.c_eta / rt;
    res.beta1 = opt.beta1_override ? *opt.beta1_override : 1.0 - opt.c_m / rt;
    res.beta2 = 1.0 - opt.c_v / static_cast<double>(T);
    res.schedule = std::string(to_string(opt.schedule));

    HyperParams h;
    h.beta1 = res.beta1;
    h.beta2 = res.beta2;
    h.weight_decay = opt.weight_decay;
    h.epsilon = opt.epsilon;
    h.peak_lr = res.eta;
    h.clip_threshold = std::nullopt;
    h.validate();

    const std::size_t d = obj.dimension;
    CounterRng init_rng(derive_seed(seed, 1), 0);
    Tensor w(Shape{d});
    for (double& x : w.data()) {
        double mag = init_rng.uniform(opt.init_low, opt.init_high);
        x = init_rng.uniform() < 0.5 ? -mag : mag;
    }

    if (opt.theory_L) {
        TheoryInputs in;
        in.L0 = obj.certified.L0;
        in.L1 = obj.certified.L1;
        in.L = *opt.theory_L;
        in.R = noise.R;
        in.T = static_cast<double>(T);
        in.delta = opt.delta;
        in.eta = res.eta;
        in.beta1 = res.beta1;
        in.beta2 = res.beta2;
        in.f_gap = obj.gap(w);
        in.d = d;
        in.epsilon = opt.epsilon;
        res.condition_checked = true;
        res.condition_warning = (1.0 - res.beta1) / res.eta < theory_constants(in).C;
    }

    Schedule sched{std::max<std::int64_t>(1, static_cast<std::int64_t>(opt.warmup_fraction * static_cast<double>(T))),
                   T, 0.1};
    const double lemma = update_norm_bound(h, 1.0, d);
    const double corrected = cauchy_schwarz_update_norm_bound(h, 1.0, d);

    std::vector<Tensor> params{w};
    Optimizer optimizer(kind, h, params);
    CounterRng noise_rng(derive_seed(seed, 2), 0);
    const double sd = d > 0 ? noise.R / std::sqrt(static_cast<double>(d)) : 0.0;

    Evaluation e = obj.evaluate(params[0]);
    const double initial = e.value;
    res.min_grad_norm = std::numeric_limits<double>::infinity();

    for (std::int64_t t = 1; t <= T; ++t) {
        double lr = opt.schedule == LrSchedule::kConstant ? res.eta : lr_at(t - 1, sched, res.eta);
        const double gn = norm(e.grad);
        const double loss = e.value;
        res.min_grad_norm = std::min(res.min_grad_norm, gn);
        Tensor g = e.grad;
        if (sd > 0.0) {
            for (double& x : g.data()) x += sd * noise_rng.normal();
        }
        std::vector<Tensor> delta;
        try {
            delta = optimizer.step(params, std::span<const Tensor>(&g, 1), lr);
            e = obj.evaluate(params[0]);
        } catch (const DomainError&) {
            res.diverged = true;
        } catch (const NonFiniteError&) {
            res.diverged = true;
        }
        if (!res.diverged && (!std::isfinite(e.value) || e.value > 10.0 * initial)) res.diverged = true;
        if (res.diverged) {
            res.trajectory.diverged = true;
            res.trajectory.note = "diverged at step " + std::to_string(t);
            break;
        }
        if (t % opt.record_stride == 0 || t == T) {
            TrajectoryRow row;
            row.step = t;
            row.lr = lr;
            row.loss = loss;
            row.grad_norm = gn;
            row.update_norm = norm(delta[0]);
            row.bound = lr * lemma;
            row.corrected_bound = lr * corrected;
            res.trajectory.append(std::move(row));
        }
    }
    res.diverged = res.trajectory.diverged;
    return res;
}

}  // namespace adams::theory
