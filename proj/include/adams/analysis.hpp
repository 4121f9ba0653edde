#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adams/io.hpp"
#include "adams/optim.hpp"
#include "adams/trajectory.hpp"
#include "adams/training.hpp"

namespace adams::analysis {

/// Trajectory driven by `train.optimizer`; the shadow optimizer sees the same (w, g) at every step
/// and evolves its own state, but its update is never applied.
struct ShadowConfig {
    TrainConfig train;
    OptimizerKind shadow = OptimizerKind::kAdamS;
    HyperParams shadow_hyper;
};

/// Rows carry the global cosine between driver and shadow updates and one cosine per parameter tensor.
/// Divergence truncates the record and sets `diverged`.
TrajectoryRecord shadow_compare(const ShadowConfig& config);

/// Mean of the global cosine over rows with first <= step <= last.
double mean_cosine(const TrajectoryRecord& record, std::int64_t first, std::int64_t last);

/// |beta1 m + (1-beta1) g| / (sqrt(beta2 m^2 + (1-beta2) g^2) + eps): one AdamS step per unit lr.
double update_magnitude(double beta1, double beta2, double eps, double m_prev, double g) noexcept;

enum class SurfaceConvention {
    kEqual,         // m_prev = g = x
    kZeroMomentum,  // m_prev = 0, g = x
    kUnitMomentum,  // m_prev = 1, g = x (x read as the ratio grad/momentum)
};
std::string_view to_string(SurfaceConvention c) noexcept;

struct SurfacePoint {
    SurfaceConvention convention = SurfaceConvention::kEqual;
    double beta2 = 0.0;
    double x = 0.0;
    double magnitude = 0.0;
};

struct SurfacePoint2d {
    double beta2 = 0.0;
    double m_prev = 0.0;
    double g = 0.0;
    double magnitude = 0.0;
};

/// n evenly spaced points from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, std::size_t n);

/// Every convention for every beta2 over the grid; long format.
std::vector<SurfacePoint> update_magnitude_surface(double beta1, const std::vector<double>& beta2_list, double eps,
                                                   const std::vector<double>& grid);
/// Full (m_prev, g) grid for every beta2.
std::vector<SurfacePoint2d> update_magnitude_surface_2d(double beta1, const std::vector<double>& beta2_list,
                                                        double eps, const std::vector<double>& grid);

CsvTable surface_table(const std::vector<SurfacePoint>& points);
CsvTable surface_table(const std::vector<SurfacePoint2d>& points);

struct RateFit {
    double exponent = 0.0;
    double intercept = 0.0;  // log-space
};

/// Least-squares slope of log(value) against log(T). Requires at least three distinct T and positive values.
RateFit rate_fit(const std::vector<std::pair<double, double>>& points);

double median(std::vector<double> values);

}  // namespace adams::analysis
