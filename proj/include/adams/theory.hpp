#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "adams/optim.hpp"
#include "adams/tensor.hpp"
#include "adams/trajectory.hpp"

namespace adams::theory {

/// Raised when an objective is evaluated outside the range where it stays finite.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// ||grad f(x) - grad f(y)|| <= (L0 + L1 ||grad f(x)||) ||x - y|| whenever ||x - y|| <= 1/L1.
struct SmoothnessParams {
    double L0 = 1.0;
    double L1 = 1.0;
    void validate() const;
};

/// P(||g - grad f|| >= s) <= 2 exp(-s^2 / (2 R^2)).
struct NoiseSpec {
    double R = 1.0;
    void validate() const;
};

struct Evaluation {
    double value = 0.0;
    Tensor grad;
};

struct Objective {
    std::string name;
    std::size_t dimension = 0;
    double f_star = 0.0;
    SmoothnessParams certified;
    std::function<Evaluation(const Tensor&)> evaluate;
    /// f(w) - f*, computed without cancellation.
    std::function<double(const Tensor&)> gap;
};

/// f(w) = a * sum_i cosh(b w_i), f* = a d. Throws DomainError when |b w_i| > 700.
/// Certified with L0 = cosh(1) a b^2, L1 = e b.
Objective cosh_objective(std::size_t d, double a, double b);
/// f(w) = c/2 ||w||^2, f* = 0. Certified with L0 = c and the given L1.
Objective quadratic_objective(std::size_t d, double curvature, double L1 = 1.0);
/// Same evaluator with a different (possibly wrong) certificate; used for negative controls.
Objective with_certificate(Objective obj, SmoothnessParams certificate, std::string name_suffix = "-recertified");

/// 2 / (L0 + L1 * grad_norm). L1 == 0 gives the classical 2 / L0.
double descent_max_lr(double L0, double L1, double grad_norm);

/// grad_norm^2 <= 3 (3 L0 + 4 L1 grad_norm) f_gap.
bool reverse_pl_holds(double f_gap, double grad_norm, double L0, double L1);

struct ProbeResult {
    double ratio = 0.0;
    double bound = 0.0;
    bool holds = false;
    bool applicable = true;  // false when ||w1 - w2|| > 1/L1
    bool surrogate = false;  // w1 == w2: ratio is a local Hessian operator-norm estimate
};

ProbeResult smoothness_probe(const Objective& obj, const Tensor& w1, const Tensor& w2);

struct TheoryInputs {
    double L0 = 1.0;
    double L1 = 1.0;
    double L = 1.0;
    double R = 1.0;
    double T = 1e4;
    double delta = 0.01;
    double eta = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.95;
    double f_gap = 1.0;
    std::size_t d = 1;
    double epsilon = 1e-8;
};

struct TheoryConstants {
    double sigma = 0.0;
    double G = 0.0;
    double F = 0.0;
    double C = 0.0;
    std::array<double, 3> sigma_arms{};
    std::array<double, 4> G_arms{};
};

/// sigma = max{sqrt(2 R^2 log(T/delta)), L eta/(1-beta1) max{beta1/sqrt(beta2), (1-beta1)/sqrt(1-beta2)}, 3 L0/(4 L1)}
/// G = max{3 L0/(4 L1), 72 L1 f_gap, sqrt(72 L1 sigma^2 eta ((1-beta1) T + 1)), 60 sqrt(L1 R^2 sigma^2 eta sqrt(2 T log(1/delta)))}
/// F = G^2 / (3 (3 L0 + 4 L1 G)),  C = sqrt(4 L^2 (G + sigma + epsilon) / epsilon^4)
TheoryConstants theory_constants(const TheoryInputs& in);

/// Isotropic Gaussian with per-coordinate std R/sqrt(dim); draw `index` of the (seed) stream.
/// R == 0 returns exact zeros.
Tensor subgaussian_noise(std::size_t dim, double R, std::uint64_t seed, std::uint64_t index = 0);

enum class LrSchedule { kConstant, kWarmupCosine };
std::string_view to_string(LrSchedule s) noexcept;
LrSchedule parse_lr_schedule(std::string_view name);

struct ExperimentOptions {
    double c_eta = 1.0;
    double c_m = 1.0;
    double c_v = 1.0;
    std::optional<double> beta1_override;
    double weight_decay = 0.0;
    double epsilon = 1e-8;
    LrSchedule schedule = LrSchedule::kConstant;
    double warmup_fraction = 0.01;  // kWarmupCosine only
    /// Initial point: each coordinate +-U[init_low, init_high] with a random sign.
    double init_low = 1.0;
    double init_high = 3.0;
    std::int64_t record_stride = 1;
    /// Smoothness constant L for the step-size condition check; unchecked when empty.
    std::optional<double> theory_L;
    double delta = 0.01;
};

struct ConvergenceResult {
    TrajectoryRecord trajectory;
    double min_grad_norm = 0.0;
    double beta1 = 0.0;
    double beta2 = 0.0;
    double eta = 0.0;
    bool diverged = false;
    bool condition_checked = false;
    bool condition_warning = false;  // (1 - beta1)/eta < C
    std::string schedule;
};

/// T noisy steps with eta = c_eta/sqrt(T), 1-beta1 = c_m/sqrt(T), 1-beta2 = c_v/T.
/// min_grad_norm is the minimum true ||grad f(w_t)|| over t = 1..T (w_1 included).
/// A value above 10x the initial one, or leaving the objective's domain, ends the run with diverged = true.
ConvergenceResult convergence_experiment(const Objective& obj, OptimizerKind kind, std::int64_t T,
                                         const NoiseSpec& noise, std::uint64_t seed,
                                         const ExperimentOptions& options = {});

}  // namespace adams::theory
