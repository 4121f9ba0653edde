#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "adams/analysis.hpp"
#include "adams/ema_stats.hpp"
#include "adams/optim.hpp"
#include "adams/theory.hpp"
#include "adams/training.hpp"

namespace adams::cli {

inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::json;

/// Schema violation with the 1-based source line when it can be located (0 otherwise).
class SchemaError : public ConfigError {
public:
    SchemaError(const std::string& message, std::size_t line);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Reads one JSON object, tracking consumed keys; finish() rejects whatever was not consumed.
class ObjectReader {
public:
    ObjectReader(const Json& object, std::string path, const std::string* source);

    bool has(const std::string& key) const;
    double number(const std::string& key, double fallback);
    std::int64_t integer(const std::string& key, std::int64_t fallback);
    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback);
    bool boolean(const std::string& key, bool fallback);
    std::string string(const std::string& key, const std::string& fallback);
    std::optional<double> nullable_number(const std::string& key, std::optional<double> fallback);
    std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback);
    /// Nested object; an absent key yields an empty object.
    ObjectReader object(const std::string& key);
    void finish() const;

    [[noreturn]] void fail(const std::string& key, const std::string& message) const;

private:
    const Json* value(const std::string& key);

    const Json& object_;
    std::string path_;
    const std::string* source_;
    std::set<std::string> consumed_;
    static const Json kEmpty;
};

/// Locates the first occurrence of "key" after the opening of `path`'s object in `source`.
std::size_t locate_key(const std::string& source, const std::string& key);

struct Common {
    std::uint64_t seed = 7;
    unsigned threads = 1;
};

struct TrainSettings {
    Common common;
    TrainConfig train;
};

struct EmaPoint {
    ema::Process process = ema::Process::kS;
    double mu = 0.0;
    double sigma = 1.0;
    double beta = 0.95;
    double beta1 = 0.9;
};

struct EmaSettings {
    Common common;
    std::int64_t samples = 1'000'000;
    std::int64_t burn_in = 0;
    double max_failure_fraction = 0.01;
    std::vector<double> mu{0.0, 1.0, 3.0};
    std::vector<double> sigma{1.0};
    std::vector<double> beta2{0.5, 0.8, 0.9, 0.95};
    /// V grid as (beta, beta1) pairs.
    std::vector<double> v_beta{0.95, 0.5, 0.9, 0.8};
    std::vector<double> v_beta1{0.9, 0.9, 0.5, 0.8};
    /// Deterministic sigma = 0 rows (mu values) for both processes.
    std::vector<double> degenerate_mu{1.0};

    std::vector<EmaPoint> points() const;
};

struct TheorySettings {
    Common common;
    std::string objective = "cosh";
    std::size_t dim = 10;
    double a = 1.0;
    double b = 1.0;
    double curvature = 1.0;  // quadratic
    double box = 3.0;        // points drawn uniformly in [-box, box]^d
    std::int64_t points = 1000;
    double negative_l1_scale = 0.05;
    double noise_R = 1.0;
    std::int64_t noise_draws = 100'000;
    std::int64_t update_states = 10'000;
    std::vector<double> update_beta1{0.0, 0.5, 0.9, 0.95, 0.99};
    std::vector<double> update_beta2{0.9, 0.95, 0.99, 0.999};
    theory::TheoryInputs constants{.L = 2.0};
    std::optional<double> expected_sigma;
    std::optional<double> expected_G;
    std::optional<double> expected_F;
    std::optional<double> expected_C;
    double constants_rel_tol = 1e-12;
};

struct CompareSettings {
    Common common;
    analysis::ShadowConfig shadow;
    /// Shadow uses the Lion transfer of the driver's hyperparameters (lr x0.1, wd x10).
    bool lion_scaling = false;
    std::int64_t window_first = 100;
    std::int64_t window_last = 1000;
    std::optional<double> baseline;
};

struct SweepSettings {
    Common common;
    TrainConfig train;
    std::vector<double> beta1{0.9, 0.95};
    std::vector<double> beta2{0.95, 0.98, 0.99, 0.995, 0.999};
    /// Cells whose final validation loss exceeds the best cell by this relative margin are flagged.
    double flag_tolerance = 0.02;
};

/// Command-line overrides applied after the file is read.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::int64_t> steps;
};

/// Parses JSON text (empty text means all defaults) into settings. Throws SchemaError.
TrainSettings parse_train(const std::string& text, const Overrides& o = {});
EmaSettings parse_ema(const std::string& text, const Overrides& o = {});
TheorySettings parse_theory(const std::string& text, const Overrides& o = {});
CompareSettings parse_compare(const std::string& text, const Overrides& o = {});
SweepSettings parse_sweep(const std::string& text, const Overrides& o = {});

/// Effective configuration in the same schema; re-parses to equal settings.
Json to_json(const TrainSettings& s);
Json to_json(const EmaSettings& s);
Json to_json(const TheorySettings& s);
Json to_json(const CompareSettings& s);
Json to_json(const SweepSettings& s);

/// Pretty-printed with sorted keys and a trailing newline.
std::string dump(const Json& j);

}  // namespace adams::cli
