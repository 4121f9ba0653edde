#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "adams/random.hpp"
#include "adams/theory.hpp"

using namespace adams;
using namespace adams::theory;

TEST_CASE("cosh objective values and gradient") {
    auto f = cosh_objective(1, 1.0, 1.0);
    auto e = f.evaluate(Tensor::vector({1.0}));
    CHECK(e.value == doctest::Approx(std::cosh(1.0)).epsilon(1e-15));
    CHECK(std::fabs(e.value - 1.5430806) < 1e-7);
    CHECK(std::fabs(e.grad[0] - 1.1752012) < 1e-7);
    CHECK(f.gap(Tensor::vector({1e-9})) == doctest::Approx(0.5e-18).epsilon(1e-9));
    CHECK_THROWS_AS(f.evaluate(Tensor::vector({701.0})), DomainError);
}

TEST_CASE("cosh gradient matches central differences") {
    auto f = cosh_objective(5, 0.7, 1.3);
    CounterRng rng(1, 0);
    for (int i = 0; i < 100; ++i) {
        Tensor w(Shape{5});
        for (double& x : w.data()) x = rng.uniform(-3.0, 3.0);
        auto g = f.evaluate(w).grad;
        for (std::size_t k = 0; k < 5; ++k) {
            const double h = 1e-6;
            Tensor p = w, m = w;
            p[k] += h;
            m[k] -= h;
            double fd = (f.evaluate(p).value - f.evaluate(m).value) / (2 * h);
            CHECK(std::fabs(fd - g[k]) <= 1e-6 * std::max(1.0, std::fabs(g[k])));
        }
    }
}

TEST_CASE("descent step size and reverse PL") {
    CHECK(descent_max_lr(1.0, 2.0, 3.0) == doctest::Approx(2.0 / 7.0));
    CHECK(descent_max_lr(2.0, 0.0, 100.0) == 1.0);
    // f = x^2 / 2 with L1 -> 0: x^2 <= 9 x^2 / 2.
    CHECK(reverse_pl_holds(0.5 * 4.0, 2.0, 1.0, 1e-12));
    CHECK_FALSE(reverse_pl_holds(0.0, 1.0, 1.0, 1.0));
}

TEST_CASE("smoothness probe on certified and mis-certified objectives") {
    auto f = cosh_objective(3, 1.0, 1.0);
    CounterRng rng(2, 0);
    int caught = 0;
    auto bad = with_certificate(f, {f.certified.L0, 0.05 * f.certified.L1});
    for (int i = 0; i < 1000; ++i) {
        Tensor w1(Shape{3}), dir(Shape{3});
        for (std::size_t k = 0; k < 3; ++k) {
            w1[k] = rng.uniform(-3.0, 3.0);
            dir[k] = rng.normal();
        }
        dir = elementwise(ElementwiseOp::kDiv, dir, norm(dir));
        Tensor w2 = axpy(rng.uniform() / f.certified.L1, dir, w1);
        auto p = smoothness_probe(f, w1, w2);
        REQUIRE(p.applicable);
        CHECK(p.holds);
        caught += !smoothness_probe(bad, w1, w2).holds;
    }
    CHECK(caught > 0);
    auto far = smoothness_probe(f, Tensor::vector({0, 0, 0}), Tensor::vector({1, 0, 0}));
    CHECK_FALSE(far.applicable);
    auto same = smoothness_probe(f, Tensor::vector({1, 1, 1}), Tensor::vector({1, 1, 1}));
    CHECK(same.surrogate);
    CHECK(same.holds);
}

TEST_CASE("theory constants") {
    TheoryInputs in;
    in.L = 2.0;
    auto c = theory_constants(in);
    // Frozen from tests/oracles/theory_constants.py.
    CHECK(c.sigma == doctest::Approx(5.256521769756932).epsilon(1e-12));
    CHECK(c.G == doctest::Approx(549.43793060567952).epsilon(1e-12));
    CHECK(c.F == doctest::Approx(45.724079415301156).epsilon(1e-12));
    CHECK(c.C == doctest::Approx(9.4207808796123601e+17).epsilon(1e-12));

    TheoryInputs big = in;
    big.L1 = 1e9;
    auto cb = theory_constants(big);
    CHECK(cb.sigma > cb.sigma_arms[2]);
    CHECK(cb.G > cb.G_arms[0]);

    TheoryInputs more = in;
    more.R = 2.0;
    CHECK(theory_constants(more).sigma >= c.sigma);
    more = in;
    more.T = 1e6;
    CHECK(theory_constants(more).sigma >= c.sigma);

    TheoryInputs bad = in;
    bad.delta = 1.0;
    CHECK_THROWS(theory_constants(bad));
    bad = in;
    bad.T = 0.5;
    CHECK_THROWS(theory_constants(bad));
}

TEST_CASE("F/G tends to 1/(12 L1)") {
    const double L0 = 1.0, L1 = 2.0, G = 1e12;
    double F = G * G / (3.0 * (3.0 * L0 + 4.0 * L1 * G));
    CHECK(F / G == doctest::Approx(1.0 / (12.0 * L1)).epsilon(1e-9));
}

TEST_CASE("sub-gaussian noise") {
    const std::size_t d = 4;
    const int n = 100000;
    std::vector<double> sum(d, 0.0), sq(d, 0.0);
    int beyond = 0;
    for (int i = 0; i < n; ++i) {
        auto x = subgaussian_noise(d, 1.0, 5, static_cast<std::uint64_t>(i));
        for (std::size_t k = 0; k < d; ++k) {
            sum[k] += x[k];
            sq[k] += x[k] * x[k];
        }
        beyond += norm(x) >= 2.0;
    }
    for (std::size_t k = 0; k < d; ++k) {
        double se = std::sqrt(sq[k] / n / n);
        CHECK(std::fabs(sum[k] / n) < 4.0 * se);
    }
    CHECK(static_cast<double>(beyond) / n <= 2.0 * std::exp(-2.0));
    CHECK(norm(subgaussian_noise(3, 0.0, 1, 0)) == 0.0);
    CHECK_THROWS(subgaussian_noise(3, -1.0, 1, 0));
}

TEST_CASE("convergence experiment") {
    auto f = cosh_objective(10, 1.0, 1.0);
    auto a = convergence_experiment(f, OptimizerKind::kAdamS, 1000, {1.0}, 3);
    auto b = convergence_experiment(f, OptimizerKind::kAdamS, 1000, {1.0}, 3);
    CHECK_FALSE(a.diverged);
    CHECK(a.min_grad_norm == b.min_grad_norm);
    CHECK(a.beta1 == doctest::Approx(1.0 - std::pow(1000.0, -0.5)));
    CHECK(a.beta2 == doctest::Approx(1.0 - std::pow(1000.0, -1.0)));
    CHECK(a.eta == doctest::Approx(std::pow(1000.0, -0.5)));
    CHECK(a.trajectory.rows.size() == 1000);
    CHECK_THROWS(convergence_experiment(f, OptimizerKind::kAdamS, 50, {1.0}, 3));

    // beta1 = 0 still makes progress on a quadratic.
    ExperimentOptions o;
    o.beta1_override = 0.0;
    auto q = quadratic_objective(10, 1.0);
    auto r = convergence_experiment(q, OptimizerKind::kAdamS, 4000, {0.1}, 4, o);
    CHECK_FALSE(r.diverged);
    CHECK(r.min_grad_norm < r.trajectory.rows.front().grad_norm);
}

TEST_CASE("16x horizon shrinks the minimum gradient norm by about 16^(1/4)") {
    auto f = cosh_objective(10, 1.0, 1.0);
    std::vector<double> shortr, longr;
    for (std::uint64_t s = 0; s < 10; ++s) {
        shortr.push_back(convergence_experiment(f, OptimizerKind::kAdamS, 1000, {1.0}, 500 + s).min_grad_norm);
        longr.push_back(convergence_experiment(f, OptimizerKind::kAdamS, 16000, {1.0}, 500 + s).min_grad_norm);
    }
    std::sort(shortr.begin(), shortr.end());
    std::sort(longr.begin(), longr.end());
    double ratio = (shortr[4] + shortr[5]) / (longr[4] + longr[5]);
    MESSAGE("median ratio " << ratio);
    CHECK(ratio >= 1.3);
    CHECK(ratio <= 3.0);
}
