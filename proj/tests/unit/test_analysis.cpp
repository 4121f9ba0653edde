#include <doctest.h>

#include <cmath>

#include "adams/analysis.hpp"
#include "adams/trajectory.hpp"

using namespace adams;
using namespace adams::analysis;

TEST_CASE("update magnitude closed forms") {
    // m_prev = 0: 0.1 |x| / (sqrt(0.05) |x| + eps) -> 0.1 / sqrt(0.05).
    CHECK(update_magnitude(0.9, 0.95, 1e-8, 0.0, 1e6) == doctest::Approx(0.1 / std::sqrt(0.05)).epsilon(1e-12));
    CHECK(std::fabs(update_magnitude(0.9, 0.95, 1e-8, 0.0, 1e6) - 0.4472) < 1e-4);
    // beta2 -> 1 with m_prev = 0: the denominator collapses to eps.
    CHECK(update_magnitude(0.9, 1.0, 1e-8, 0.0, 1e-3) == doctest::Approx(0.1 * 1e-3 / 1e-8));
    // Constant gradient: exactly 1 up to eps.
    CHECK(update_magnitude(0.9, 0.95, 0.0, 2.0, 2.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("surfaces never exceed the Cauchy-Schwarz cap") {
    auto grid = linspace(-5.0, 5.0, 41);
    CHECK(grid.front() == -5.0);
    CHECK(grid.back() == 5.0);
    std::vector<double> b2{0.9, 0.95, 0.99, 0.999};
    auto pts = update_magnitude_surface(0.9, b2, 1e-8, grid);
    CHECK(pts.size() == 3 * b2.size() * grid.size());
    for (const auto& p : pts) CHECK(p.magnitude <= cauchy_schwarz_update_factor(0.9, p.beta2) + 1e-12);
    auto pts2 = update_magnitude_surface_2d(0.9, b2, 1e-8, grid);
    CHECK(pts2.size() == b2.size() * grid.size() * grid.size());
    double worst = 0.0;
    for (const auto& p : pts2) {
        CHECK(p.magnitude <= cauchy_schwarz_update_factor(0.9, p.beta2) + 1e-12);
        worst = std::max(worst, p.magnitude / lemma_update_factor(0.9, p.beta2));
    }
    // The printed lemma factor is exceeded somewhere on the grid.
    CHECK(worst > 1.0);
    auto table = surface_table(pts);
    CHECK(table.rows.size() == pts.size());
    CHECK(table.header.front() == "convention");
}

TEST_CASE("rate fit recovers an exact power law") {
    std::vector<std::pair<double, double>> pts;
    for (double T : {1e3, 4e3, 1.6e4, 6.4e4}) pts.emplace_back(T, 3.0 * std::pow(T, -0.25));
    auto f = rate_fit(pts);
    CHECK(f.exponent == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK_THROWS(rate_fit({{1.0, 1.0}, {2.0, 1.0}}));
    CHECK_THROWS(rate_fit({{1.0, 1.0}, {2.0, -1.0}, {3.0, 1.0}}));
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
}

TEST_CASE("shadow comparison") {
    ShadowConfig c;
    c.train.optimizer = OptimizerKind::kAdamW;
    c.train.steps = 60;
    c.train.warmup_steps = 5;
    c.train.corpus_length = 20000;
    c.train.eval_size = 256;
    c.shadow_hyper = c.train.hyper;
    auto rec = shadow_compare(c);
    REQUIRE(rec.rows.size() == 60);
    CHECK(rec.rows.front().cosine == 1.0);
    for (double gc : rec.rows.front().group_cosines) CHECK(gc == 1.0);
    double m = mean_cosine(rec, 10, 60);
    CHECK(m > 0.5);
    CHECK(m < 1.0);

    // An AdamW shadow of an AdamW driver is the same update every step.
    c.shadow = OptimizerKind::kAdamW;
    auto same = shadow_compare(c);
    CHECK(mean_cosine(same, 1, 60) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("trajectory csv round-trip") {
    TrajectoryRecord r;
    r.groups = {"a", "b"};
    TrajectoryRow row;
    row.step = 1;
    row.lr = 0.1;
    row.loss = 2.5;
    row.grad_norm = 0.3;
    row.update_norm = 0.01;
    row.clip_scale = 0.5;
    row.cosine = 0.9;
    row.group_cosines = {1.0, kNotRecorded};
    r.append(row);
    auto back = TrajectoryRecord::from_csv(r.to_csv());
    CHECK(back.to_csv() == r.to_csv());
    CHECK(back.rows[0].clipped());
    CHECK(std::isnan(back.rows[0].bound));
    TrajectoryRow bad = row;
    bad.step = 1;
    CHECK_THROWS(r.append(bad));
}
