#pragma once

#include <cstdint>
#include <optional>

namespace adams::ema {

/// X_t ~ N(mu, sigma^2), i.i.d.
struct GaussianSpec {
    double mu = 0.0;
    double sigma = 1.0;
    void validate() const;
};

struct MomentStats {
    double mean = 0.0;
    double variance = 0.0;
};

/// Var = two_sigma4 * (2 sigma^4) + four_mu2_sigma2 * (4 mu^2 sigma^2).
struct VarianceCoefficients {
    double two_sigma4 = 0.0;
    double four_mu2_sigma2 = 0.0;
};

/// S_t = (1 - beta2) X_t^2 + beta2 S_{t-1}, S_0 = 0. `t` empty means the stationary limit.
MomentStats s_moments(const GaussianSpec& spec, double beta2, std::optional<std::int64_t> t = std::nullopt);
VarianceCoefficients s_variance_coefficients(double beta2);

/// V = beta M^2 + (1 - beta) X^2 with M the stationary beta1-EMA of X, independent of X.
MomentStats v_moments_inf(const GaussianSpec& spec, double beta, double beta1);
VarianceCoefficients v_variance_coefficients(double beta, double beta1);

enum class Process { kS, kV };

struct McRequest {
    Process process = Process::kS;
    GaussianSpec spec;
    double beta = 0.95;   // beta2 for S, mixing weight for V
    double beta1 = 0.9;   // V only
    std::int64_t burn_in = 0;  // 0 selects burn_in_steps(max beta)
    std::int64_t samples = 1'000'000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

struct McResult {
    MomentStats estimate;
    double mean_se = 0.0;
    double variance_se = 0.0;
    std::int64_t burn_in = 0;
    std::int64_t batches = 0;
};

/// ceil(ln(1e-6) / ln(max_beta)); at least 1.
std::int64_t burn_in_steps(double max_beta);

/// Independent chains, one counter-based stream per chain; standard errors from batch means.
/// For V, the final draw X_t is fresh and independent of M_{t-1}. sigma == 0 runs the
/// deterministic recursion to its fixed point and reports zero variance and zero standard errors.
McResult mc_moments(const McRequest& request);

struct DenominatorGap {
    double abs_gap = 0.0;
    double rel_gap = 0.0;
};

/// |E[S_inf] - E[V_inf]| and its ratio to E[S_inf] (0 when E[S_inf] = 0).
DenominatorGap denominator_gap(const GaussianSpec& spec, double beta, double beta1);

/// argmin over beta in [0, 1) of Var(V_inf).
double variance_minimizing_beta(const GaussianSpec& spec, double beta1);
/// argmin over beta in [0, 1) of |Var(S_inf; beta2) - Var(V_inf; beta, beta1)|.
double variance_matching_beta(const GaussianSpec& spec, double beta1, double beta2);

}  // namespace adams::ema
