#include "adams/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "adams/optimizer.hpp"

namespace adams::analysis {

TrajectoryRecord shadow_compare(const ShadowConfig& config) {
    config.shadow_hyper.validate();
    TrainingSession session(config.train);
    const auto& names = TinyLm::param_names();
    TrajectoryRecord rec;
    rec.groups = names;

    Optimizer driver(config.train.optimizer, config.train.hyper, session.model().params());
    Optimizer shadow(config.shadow, config.shadow_hyper, session.model().params());
    const double limit = 10.0 * session.train_loss();

    for (std::int64_t t = 1; t <= config.train.steps; ++t) {
        auto g = session.gradients(t);
        if (!std::isfinite(g.loss) || g.loss > limit || !std::isfinite(g.grad_norm)) {
            rec.diverged = true;
            rec.note = "diverged at step " + std::to_string(t);
            break;
        }
        std::vector<Tensor> shadow_params = session.model().params();
        std::vector<Tensor> shadow_delta;
        std::vector<Tensor> driver_delta;
        double shadow_lr = session.lr(t, config.shadow_hyper.peak_lr);
        try {
            shadow_delta = shadow.step(shadow_params, g.grads, shadow_lr);
            driver_delta = driver.step(session.model().mutable_params(), g.grads, g.lr);
        } catch (const NonFiniteError&) {
            rec.diverged = true;
            rec.note = "non-finite update at step " + std::to_string(t);
            break;
        }
        TrajectoryRow row;
        row.step = t;
        row.lr = g.lr;
        row.loss = g.loss;
        row.grad_norm = g.grad_norm;
        row.update_norm = global_norm(driver_delta);
        row.clip_scale = g.clip.scale;
        auto global = cosine_similarity(driver_delta, shadow_delta);
        row.cosine = global.degenerate ? kNotRecorded : global.value;
        for (std::size_t i = 0; i < names.size(); ++i) {
            auto c = cosine_similarity(driver_delta[i], shadow_delta[i]);
            row.group_cosines.push_back(c.degenerate ? kNotRecorded : c.value);
        }
        rec.append(std::move(row));
    }
    return rec;
}

double mean_cosine(const TrajectoryRecord& record, std::int64_t first, std::int64_t last) {
    double total = 0.0;
    std::size_t n = 0;
    for (const auto& r : record.rows) {
        if (r.step < first || r.step > last || std::isnan(r.cosine)) continue;
        total += r.cosine;
        ++n;
    }
    if (n == 0) throw std::invalid_argument("mean_cosine: no rows in the requested window");
    return total / static_cast<double>(n);
}

double update_magnitude(double beta1, double beta2, double eps, double m_prev, double g) noexcept {
    double m = beta1 * m_prev + (1.0 - beta1) * g;
    double nu = beta2 * m_prev * m_prev + (1.0 - beta2) * g * g;
    return std::fabs(m) / (std::sqrt(nu) + eps);
}

std::string_view to_string(SurfaceConvention c) noexcept {
    switch (c) {
        case SurfaceConvention::kEqual: return "equal";
        case SurfaceConvention::kZeroMomentum: return "zero_momentum";
        case SurfaceConvention::kUnitMomentum: return "unit_momentum";
    }
    return "unknown";
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n == 0) throw std::invalid_argument("linspace: n must be positive");
    if (n == 1) return {lo};
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return out;
}

std::vector<SurfacePoint> update_magnitude_surface(double beta1, const std::vector<double>& beta2_list, double eps,
                                                   const std::vector<double>& grid) {
    if (grid.empty() || beta2_list.empty()) throw std::invalid_argument("update_magnitude_surface: empty grid");
    std::vector<SurfacePoint> out;
    for (auto conv : {SurfaceConvention::kEqual, SurfaceConvention::kZeroMomentum, SurfaceConvention::kUnitMomentum}) {
        for (double b2 : beta2_list) {
            for (double x : grid) {
                double m_prev = conv == SurfaceConvention::kEqual ? x : conv == SurfaceConvention::kZeroMomentum ? 0.0 : 1.0;
                out.push_back({conv, b2, x, update_magnitude(beta1, b2, eps, m_prev, x)});
            }
        }
    }
    return out;
}

std::vector<SurfacePoint2d> update_magnitude_surface_2d(double beta1, const std::vector<double>& beta2_list,
                                                        double eps, const std::vector<double>& grid) {
    if (grid.empty() || beta2_list.empty()) throw std::invalid_argument("update_magnitude_surface_2d: empty grid");
    std::vector<SurfacePoint2d> out;
    out.reserve(beta2_list.size() * grid.size() * grid.size());
    for (double b2 : beta2_list) {
        for (double m : grid) {
            for (double g : grid) out.push_back({b2, m, g, update_magnitude(beta1, b2, eps, m, g)});
        }
    }
    return out;
}

CsvTable surface_table(const std::vector<SurfacePoint>& points) {
    CsvTable t;
    t.header = {"convention", "beta2", "x", "magnitude"};
    for (const auto& p : points) {
        t.rows.push_back({std::string(to_string(p.convention)), format_double(p.beta2), format_double(p.x),
                          format_double(p.magnitude)});
    }
    return t;
}

CsvTable surface_table(const std::vector<SurfacePoint2d>& points) {
    CsvTable t;
    t.header = {"beta2", "m_prev", "g", "magnitude"};
    for (const auto& p : points) {
        t.rows.push_back({format_double(p.beta2), format_double(p.m_prev), format_double(p.g), format_double(p.magnitude)});
    }
    return t;
}

RateFit rate_fit(const std::vector<std::pair<double, double>>& points) {
    std::set<double> distinct;
    for (const auto& [T, v] : points) {
        if (!(T > 0.0) || !(v > 0.0)) throw std::invalid_argument("rate_fit: T and values must be positive");
        distinct.insert(T);
    }
    if (distinct.size() < 3) throw std::invalid_argument("rate_fit: at least three distinct T values required");
    const double n = static_cast<double>(points.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [T, v] : points) {
        mx += std::log(T);
        my += std::log(v);
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (const auto& [T, v] : points) {
        double dx = std::log(T) - mx;
        sxy += dx * (std::log(v) - my);
        sxx += dx * dx;
    }
    RateFit fit;
    fit.exponent = sxy / sxx;
    fit.intercept = my - fit.exponent * mx;
    return fit;
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median: empty input");
    std::sort(values.begin(), values.end());
    std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace adams::analysis
