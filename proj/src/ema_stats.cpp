#include "adams/ema_stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "adams/parallel.hpp"
#include "adams/random.hpp"

namespace adams::ema {

namespace {

void check_beta(double beta, const char* name) {
    if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument(std::string(name) + " must lie in [0, 1)");
}

struct BatchStats {
    std::int64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;  // sum of squared deviations
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
};

// Chan et al. pairwise combination; called in a fixed order so the result is thread-count independent.
BatchStats combine(const BatchStats& a, const BatchStats& b) {
    if (a.n == 0) return b;
    BatchStats out;
    out.n = a.n + b.n;
    double delta = b.mean - a.mean;
    out.mean = a.mean + delta * static_cast<double>(b.n) / static_cast<double>(out.n);
    out.m2 = a.m2 + b.m2 + delta * delta * static_cast<double>(a.n) * static_cast<double>(b.n) / static_cast<double>(out.n);
    return out;
}

double simulate_chain(const McRequest& r, std::int64_t burn_in, std::uint64_t chain) {
    CounterRng rng(r.seed, chain);
    const double mu = r.spec.mu;
    const double sigma = r.spec.sigma;
    if (r.process == Process::kS) {
        double s = 0.0;
        for (std::int64_t t = 0; t < burn_in; ++t) {
            double x = mu + sigma * rng.normal();
            s = (1.0 - r.beta) * (x * x) + r.beta * s;
        }
        return s;
    }
    double m = 0.0;
    for (std::int64_t t = 0; t < burn_in; ++t) {
        double x = mu + sigma * rng.normal();
        m = (1.0 - r.beta1) * x + r.beta1 * m;
    }
    double fresh = mu + sigma * rng.normal();
    return r.beta * (m * m) + (1.0 - r.beta) * (fresh * fresh);
}

// sigma == 0: iterate the recursion to its floating-point fixed point (at least `burn_in` steps).
double deterministic_value(const McRequest& r, std::int64_t burn_in) {
    const double x = r.spec.mu;
    auto settle = [burn_in](double rate, double input) {
        double s = 0.0;
        for (std::int64_t t = 0; t < 1'000'000; ++t) {
            double next = (1.0 - rate) * input + rate * s;
            if (t >= burn_in && next == s) break;
            s = next;
        }
        return s;
    };
    if (r.process == Process::kS) return settle(r.beta, x * x);
    double m = settle(r.beta1, x);
    return r.beta * (m * m) + (1.0 - r.beta) * (x * x);
}

double golden_section_min(const std::function<double(double)>& f, double lo, double hi, int iterations = 200) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iterations && (b - a) > 1e-15; ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

// Coarse scan then golden-section refinement inside the best cell; robust to non-unimodal |.|.
double scan_then_refine(const std::function<double(double)>& f) {
    constexpr int kGrid = 10000;
    constexpr double kUpper = 1.0 - 1e-12;
    int best = 0;
    double best_value = f(0.0);
    for (int i = 1; i <= kGrid; ++i) {
        double x = kUpper * i / kGrid;
        double v = f(x);
        if (v < best_value) {
            best_value = v;
            best = i;
        }
    }
    double lo = kUpper * std::max(0, best - 1) / kGrid;
    double hi = kUpper * std::min(kGrid, best + 1) / kGrid;
    double x = golden_section_min(f, lo, hi);
    return f(x) <= best_value ? x : kUpper * best / kGrid;
}

}  // namespace

void GaussianSpec::validate() const {
    if (!(sigma >= 0.0) || !std::isfinite(mu)) throw std::invalid_argument("GaussianSpec requires sigma >= 0");
}

VarianceCoefficients s_variance_coefficients(double beta2) {
    check_beta(beta2, "beta2");
    double c = (1.0 - beta2) / (1.0 + beta2);
    return {c, c};
}

MomentStats s_moments(const GaussianSpec& spec, double beta2, std::optional<std::int64_t> t) {
    spec.validate();
    check_beta(beta2, "beta2");
    if (t && *t < 1) throw std::invalid_argument("s_moments: t must be >= 1");
    const double mu2 = spec.mu * spec.mu;
    const double s2 = spec.sigma * spec.sigma;
    double transient = 1.0;
    double transient_sq = 1.0;
    if (t) {
        transient = 1.0 - std::pow(beta2, static_cast<double>(*t));
        transient_sq = 1.0 - std::pow(beta2, 2.0 * static_cast<double>(*t));
    }
    auto c = s_variance_coefficients(beta2);
    return {(mu2 + s2) * transient, (2.0 * s2 * s2 + 4.0 * mu2 * s2) * c.two_sigma4 * transient_sq};
}

VarianceCoefficients v_variance_coefficients(double beta, double beta1) {
    check_beta(beta, "beta");
    check_beta(beta1, "beta1");
    double r = (1.0 - beta1) / (1.0 + beta1);
    double tail = (1.0 - beta) * (1.0 - beta);
    return {beta * beta * r * r + tail, beta * beta * r + tail};
}

MomentStats v_moments_inf(const GaussianSpec& spec, double beta, double beta1) {
    spec.validate();
    auto c = v_variance_coefficients(beta, beta1);
    const double mu2 = spec.mu * spec.mu;
    const double s2 = spec.sigma * spec.sigma;
    double mean = mu2 + s2 * (1.0 - 2.0 * beta * beta1 / (1.0 + beta1));
    double var = 2.0 * s2 * s2 * c.two_sigma4 + 4.0 * mu2 * s2 * c.four_mu2_sigma2;
    return {mean, var};
}

std::int64_t burn_in_steps(double max_beta) {
    check_beta(max_beta, "beta");
    if (max_beta == 0.0) return 1;
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(std::log(1e-6) / std::log(max_beta))));
}

McResult mc_moments(const McRequest& r) {
    r.spec.validate();
    check_beta(r.beta, "beta");
    check_beta(r.beta1, "beta1");
    if (r.samples < 10'000) throw std::invalid_argument("mc_moments: at least 10^4 samples required");
    McResult result;
    double max_beta = r.process == Process::kS ? r.beta : std::max(r.beta, r.beta1);
    result.burn_in = r.burn_in > 0 ? r.burn_in : burn_in_steps(max_beta);

    if (r.spec.sigma == 0.0) {
        result.estimate = {deterministic_value(r, result.burn_in), 0.0};
        result.batches = 0;
        return result;
    }

    const std::int64_t n = r.samples;
    const std::int64_t nb = std::min<std::int64_t>(1000, n / 10);
    result.batches = nb;
    std::vector<BatchStats> batches(static_cast<std::size_t>(nb));
    parallel_for(static_cast<std::size_t>(nb), r.threads, [&](std::size_t b) {
        std::int64_t begin = n * static_cast<std::int64_t>(b) / nb;
        std::int64_t end = n * (static_cast<std::int64_t>(b) + 1) / nb;
        BatchStats s;
        for (std::int64_t c = begin; c < end; ++c) {
            double x = simulate_chain(r, result.burn_in, static_cast<std::uint64_t>(c));
            ++s.n;
            double delta = x - s.mean;
            s.mean += delta / static_cast<double>(s.n);
            s.m2 += delta * (x - s.mean);
        }
        batches[b] = s;
    });

    BatchStats total;
    for (const auto& b : batches) total = combine(total, b);
    result.estimate = {total.mean, total.variance()};

    double mean_of_means = 0.0, mean_of_vars = 0.0;
    for (const auto& b : batches) {
        mean_of_means += b.mean;
        mean_of_vars += b.variance();
    }
    mean_of_means /= static_cast<double>(nb);
    mean_of_vars /= static_cast<double>(nb);
    double ss_means = 0.0, ss_vars = 0.0;
    for (const auto& b : batches) {
        ss_means += (b.mean - mean_of_means) * (b.mean - mean_of_means);
        ss_vars += (b.variance() - mean_of_vars) * (b.variance() - mean_of_vars);
    }
    double dof = static_cast<double>(nb - 1);
    result.mean_se = std::sqrt(ss_means / dof / static_cast<double>(nb));
    result.variance_se = std::sqrt(ss_vars / dof / static_cast<double>(nb));
    return result;
}

DenominatorGap denominator_gap(const GaussianSpec& spec, double beta, double beta1) {
    double es = s_moments(spec, 0.0).mean;  // E[S_inf] = mu^2 + sigma^2 for every beta2
    double ev = v_moments_inf(spec, beta, beta1).mean;
    DenominatorGap gap;
    gap.abs_gap = std::fabs(es - ev);
    gap.rel_gap = es == 0.0 ? 0.0 : gap.abs_gap / es;
    return gap;
}

double variance_minimizing_beta(const GaussianSpec& spec, double beta1) {
    spec.validate();
    check_beta(beta1, "beta1");
    return scan_then_refine([&](double b) { return v_moments_inf(spec, b, beta1).variance; });
}

double variance_matching_beta(const GaussianSpec& spec, double beta1, double beta2) {
    spec.validate();
    double target = s_moments(spec, beta2).variance;
    return scan_then_refine([&](double b) { return std::fabs(v_moments_inf(spec, b, beta1).variance - target); });
}

}  // namespace adams::ema
