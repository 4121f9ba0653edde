#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

namespace adams {

inline constexpr double kNotRecorded = std::numeric_limits<double>::quiet_NaN();

struct TrajectoryRow {
    std::int64_t step = 0;
    double lr = 0.0;
    double loss = 0.0;
    double grad_norm = 0.0;
    double update_norm = 0.0;
    double bound = kNotRecorded;          // lemma cap lr * sqrt(d) * max{...}
    double corrected_bound = kNotRecorded;  // Cauchy-Schwarz cap
    double clip_scale = 1.0;
    double cosine = kNotRecorded;         // global flattened cosine, shadow runs only
    std::vector<double> group_cosines;    // one per TrajectoryRecord::groups entry

    bool clipped() const noexcept { return clip_scale < 1.0; }
};

/// Steps strictly increase; cosines lie in [-1, 1] when recorded.
struct TrajectoryRecord {
    std::vector<std::string> groups;
    std::vector<TrajectoryRow> rows;
    bool diverged = false;
    std::string note;

    /// Throws std::invalid_argument when an invariant is broken.
    void validate() const;
    void append(TrajectoryRow row);

    std::string to_csv() const;
    static TrajectoryRecord from_csv(const std::string& text);
    void write_csv(const std::filesystem::path& path) const;
    static TrajectoryRecord read_csv(const std::filesystem::path& path);
};

}  // namespace adams
