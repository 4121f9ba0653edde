#include "adams/trajectory.hpp"

#include <cmath>
#include <stdexcept>

#include "adams/io.hpp"

namespace adams {

namespace {

constexpr const char* kFixedColumns[] = {"step",      "lr",       "loss",     "grad_norm", "update_norm",
                                         "bound",     "corrected_bound", "clipped", "clip_scale", "cosine"};
constexpr std::size_t kFixedCount = sizeof(kFixedColumns) / sizeof(kFixedColumns[0]);
constexpr std::string_view kGroupPrefix = "cosine:";

bool cosine_ok(double c) { return std::isnan(c) || (c >= -1.0 && c <= 1.0); }

}  // namespace

void TrajectoryRecord::validate() const {
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (i > 0 && r.step <= rows[i - 1].step) throw std::invalid_argument("trajectory steps must strictly increase");
        if (!cosine_ok(r.cosine)) throw std::invalid_argument("trajectory cosine outside [-1, 1]");
        if (r.group_cosines.size() != groups.size()) throw std::invalid_argument("trajectory group cosine count mismatch");
        for (double c : r.group_cosines) {
            if (!cosine_ok(c)) throw std::invalid_argument("trajectory group cosine outside [-1, 1]");
        }
    }
}

void TrajectoryRecord::append(TrajectoryRow row) {
    if (!rows.empty() && row.step <= rows.back().step) throw std::invalid_argument("trajectory steps must strictly increase");
    if (row.group_cosines.empty() && !groups.empty()) row.group_cosines.assign(groups.size(), kNotRecorded);
    rows.push_back(std::move(row));
}

std::string TrajectoryRecord::to_csv() const {
    validate();
    CsvTable table;
    for (const char* c : kFixedColumns) table.header.emplace_back(c);
    for (const auto& g : groups) table.header.push_back(std::string(kGroupPrefix) + g);
    table.rows.reserve(rows.size());
    for (const auto& r : rows) {
        std::vector<std::string> cells{std::to_string(r.step),         format_double(r.lr),
                                       format_double(r.loss),          format_double(r.grad_norm),
                                       format_double(r.update_norm),   format_double(r.bound),
                                       format_double(r.corrected_bound), r.clipped() ? "1" : "0",
                                       format_double(r.clip_scale),    format_double(r.cosine)};
        for (double c : r.group_cosines) cells.push_back(format_double(c));
        table.rows.push_back(std::move(cells));
    }
    return table.to_string();
}

TrajectoryRecord TrajectoryRecord::from_csv(const std::string& text) {
    CsvTable table = CsvTable::parse(text);
    if (table.header.size() < kFixedCount) throw std::invalid_argument("trajectory csv: missing columns");
    for (std::size_t i = 0; i < kFixedCount; ++i) {
        if (table.header[i] != kFixedColumns[i]) {
            throw std::invalid_argument("trajectory csv: expected column '" + std::string(kFixedColumns[i]) + "'");
        }
    }
    TrajectoryRecord rec;
    for (std::size_t i = kFixedCount; i < table.header.size(); ++i) {
        const auto& h = table.header[i];
        if (h.rfind(kGroupPrefix, 0) != 0) throw std::invalid_argument("trajectory csv: unexpected column " + h);
        rec.groups.push_back(h.substr(kGroupPrefix.size()));
    }
    for (const auto& cells : table.rows) {
        TrajectoryRow r;
        r.step = std::stoll(cells[0]);
        r.lr = parse_double(cells[1]);
        r.loss = parse_double(cells[2]);
        r.grad_norm = parse_double(cells[3]);
        r.update_norm = parse_double(cells[4]);
        r.bound = parse_double(cells[5]);
        r.corrected_bound = parse_double(cells[6]);
        r.clip_scale = parse_double(cells[8]);
        r.cosine = parse_double(cells[9]);
        for (std::size_t i = kFixedCount; i < cells.size(); ++i) r.group_cosines.push_back(parse_double(cells[i]));
        rec.rows.push_back(std::move(r));
    }
    rec.validate();
    return rec;
}

void TrajectoryRecord::write_csv(const std::filesystem::path& path) const { write_file_atomic(path, to_csv()); }

TrajectoryRecord TrajectoryRecord::read_csv(const std::filesystem::path& path) { return from_csv(read_file(path)); }

}  // namespace adams
