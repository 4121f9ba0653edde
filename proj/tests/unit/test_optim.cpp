#include <doctest.h>

#include <cmath>

#include "adams/optim.hpp"
#include "adams/random.hpp"

using namespace adams;

namespace {

HyperParams plain(double b1 = 0.9, double b2 = 0.95) {
    HyperParams h;
    h.beta1 = b1;
    h.beta2 = b2;
    h.weight_decay = 0.0;
    h.epsilon = 1e-8;
    return h;
}

const Tensor kOne = Tensor::vector({1.0});

}  // namespace

TEST_CASE("AdamS scalar oracles") {
    auto r = adams_step(kOne, kOne, AdamSState::zeros_like(kOne), plain(), 0.1);
    CHECK(std::fabs(r.w[0] - (1.0 - 0.01 / (std::sqrt(0.05) + 1e-8))) <= 1e-12);
    CHECK(std::fabs(r.w[0] - 0.9552786) < 1e-7);
    CHECK(r.state.m[0] == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(r.state.step == 1);

    HyperParams h = plain();
    h.weight_decay = 0.1;
    r = adams_step(kOne, kOne, AdamSState::zeros_like(kOne), h, 0.1);
    CHECK(std::fabs(r.w[0] - 0.9452786) < 1e-7);
}

TEST_CASE("AdamS uses the previous momentum in the denominator") {
    // m_prev = 2, g = 0: nu = 0.95 * 4, m' = 1.8.
    auto r = adams_step(kOne, Tensor::vector({0.0}), AdamSState{Tensor::vector({2.0}), 5}, plain(), 0.1);
    CHECK(std::fabs(r.w[0] - (1.0 - 0.1 * 1.8 / (std::sqrt(0.95 * 4.0) + 1e-8))) <= 1e-15);
}

TEST_CASE("zero gradient and zero momentum is a fixed point") {
    Tensor z = Tensor::vector({0.0});
    auto r = adams_step(kOne, z, AdamSState::zeros_like(kOne), plain(), 0.1);
    CHECK(r.w[0] == 1.0);
    CHECK(r.state.m[0] == 0.0);
}

TEST_CASE("non-finite gradients are rejected") {
    Tensor bad = Tensor::vector({std::nan("")});
    CHECK_THROWS_AS(adams_step(kOne, bad, AdamSState::zeros_like(kOne), plain(), 0.1), NonFiniteError);
    CHECK_THROWS_AS(adamw_step(kOne, bad, AdamWState::zeros_like(kOne), plain(), 0.1), NonFiniteError);
    CHECK_THROWS_AS(lion_step(kOne, bad, LionState::zeros_like(kOne), plain(), 0.1), NonFiniteError);
}

TEST_CASE("AdamW two-step state") {
    auto a = adamw_step(kOne, kOne, AdamWState::zeros_like(kOne), plain(), 0.1);
    CHECK(std::fabs(a.w[0] - 0.9552786) < 1e-7);
    auto b = adamw_step(a.w, kOne, a.state, plain(), 0.1);
    CHECK(b.state.v[0] == doctest::Approx(0.0975).epsilon(1e-14));
    CHECK(b.state.m[0] == doctest::Approx(0.19).epsilon(1e-14));
}

TEST_CASE("AdamW zero-gradient path only decays") {
    HyperParams h = plain();
    h.weight_decay = 0.1;
    Tensor w = kOne;
    auto s = AdamWState::zeros_like(w);
    for (int i = 0; i < 3; ++i) {
        auto r = adamw_step(w, Tensor::vector({0.0}), s, h, 0.1);
        w = r.w;
        s = r.state;
    }
    CHECK(w[0] == doctest::Approx(std::pow(0.99, 3)).epsilon(1e-15));
}

TEST_CASE("first step from zero state: AdamS equals AdamW bitwise") {
    CounterRng rng(9, 0);
    for (int i = 0; i < 200; ++i) {
        Tensor w(Shape{4}), g(Shape{4});
        for (std::size_t k = 0; k < 4; ++k) {
            w[k] = rng.normal();
            g[k] = rng.normal() * 10.0;
        }
        HyperParams h = plain(rng.uniform(), rng.uniform(0.5, 0.999));
        h.weight_decay = rng.uniform(0.0, 0.3);
        auto s = adams_step(w, g, AdamSState::zeros_like(w), h, 0.01);
        auto a = adamw_step(w, g, AdamWState::zeros_like(w), h, 0.01);
        CHECK(s.w == a.w);
    }
}

TEST_CASE("Lion oracle and sign convention") {
    HyperParams h = plain(0.95, 0.98);
    h.weight_decay = 1.0;
    auto r = lion_step(kOne, kOne, LionState::zeros_like(kOne), h, 0.01);
    CHECK(r.w[0] == doctest::Approx(0.98).epsilon(1e-15));
    CHECK(r.state.m[0] == doctest::Approx(0.02).epsilon(1e-15));

    h.weight_decay = 0.0;
    auto z = lion_step(kOne, Tensor::vector({0.0}), LionState::zeros_like(kOne), h, 0.01);
    CHECK(z.w[0] == 1.0);
    auto big = lion_step(kOne, Tensor::vector({-1e300}), LionState::zeros_like(kOne), h, 0.01);
    CHECK(big.w[0] == doctest::Approx(1.01).epsilon(1e-15));
}

TEST_CASE("Adam-mini block oracles") {
    Tensor w = Tensor::vector({0.0, 0.0});
    auto r = adam_mini_step(w, Tensor::vector({3.0, 4.0}), AdamMiniState::create(w), plain(), 0.1);
    CHECK(r.state.v.size() == 1);
    CHECK(r.state.v[0] == doctest::Approx(0.05 * 12.5).epsilon(1e-15));
    HyperParams h0 = plain(0.0, 0.0);
    h0.epsilon = 1e-300;
    auto d = adam_mini_step(w, Tensor::vector({3.0, 4.0}), AdamMiniState::create(w), h0, 1.0);
    CHECK(d.w[0] == doctest::Approx(-3.0 / std::sqrt(12.5)).epsilon(1e-15));
    CHECK(d.w[1] == doctest::Approx(-4.0 / std::sqrt(12.5)).epsilon(1e-15));
    CHECK_THROWS(AdamMiniState::create(w, {{"a", 0, 1}}));
    CHECK_THROWS(AdamMiniState::create(w, {{"a", 0, 0}, {"b", 0, 2}}));
}

TEST_CASE("SGD with momentum") {
    auto r = sgdm_step(kOne, kOne, SgdmState::zeros_like(kOne), plain(), 0.1);
    CHECK(r.w[0] == doctest::Approx(0.99).epsilon(1e-15));
}

TEST_CASE("schedule") {
    Schedule s{10, 110, 0.1};
    CHECK(lr_at(0, s, 1.0) == 0.0);
    CHECK(lr_at(10, s, 1.0) == 1.0);
    CHECK(lr_at(60, s, 1.0) == doctest::Approx(0.55).epsilon(1e-14));
    CHECK(lr_at(110, s, 1.0) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK_THROWS_AS(lr_at(111, s, 1.0), std::out_of_range);
    CHECK_THROWS_AS(lr_at(-1, s, 1.0), std::out_of_range);
}

TEST_CASE("update-norm bounds") {
    HyperParams h;
    CHECK(std::fabs(update_norm_bound(h, 6e-4, 4) - 0.00110806) < 5e-9);
    CHECK(lemma_update_factor(0.9, 0.95) == doctest::Approx(0.923379).epsilon(1e-6));
    CHECK(cauchy_schwarz_update_factor(0.9, 0.95) == doctest::Approx(std::sqrt(0.81 / 0.95 + 0.01 / 0.05)));
    // The published factor is exceeded by a constant gradient (m_prev = g): ratio exactly 1.
    HyperParams p = plain();
    auto r = adams_step(Tensor::vector({0.0}), kOne, AdamSState{kOne, 1}, p, 1.0);
    CHECK(std::fabs(r.w[0]) > lemma_update_factor(0.9, 0.95));
    CHECK(std::fabs(r.w[0]) <= cauchy_schwarz_update_factor(0.9, 0.95));
}

TEST_CASE("AdamS steps respect the Cauchy-Schwarz cap") {
    CounterRng rng(4, 0);
    for (double b1 : {0.0, 0.5, 0.9, 0.99}) {
        for (double b2 : {0.9, 0.95, 0.999}) {
            HyperParams h = plain(b1, b2);
            for (int i = 0; i < 2000; ++i) {
                Tensor w(Shape{8}), g(Shape{8}), m(Shape{8});
                for (std::size_t k = 0; k < 8; ++k) {
                    g[k] = rng.normal();
                    m[k] = rng.normal() * std::exp(rng.uniform(-4.0, 4.0));
                }
                auto r = adams_step(w, g, AdamSState{m, 1}, h, 0.1);
                REQUIRE(norm(r.w) <= cauchy_schwarz_update_norm_bound(h, 0.1, 8) + 1e-12);
            }
        }
    }
}

TEST_CASE("memory footprint") {
    std::vector<std::int64_t> big{1'500'000'000};
    CHECK(memory_footprint(OptimizerKind::kAdamW, big).state_scalars == 3'000'000'000);
    CHECK(memory_footprint(OptimizerKind::kAdamS, big).state_scalars == 1'500'000'000);
    CHECK(memory_footprint(OptimizerKind::kAdamS, big).ratio_vs_adamw == Rational{1, 2});
    CHECK(memory_footprint(OptimizerKind::kSgdMomentum, big).ratio_vs_adamw == Rational{1, 2});
    std::vector<std::int64_t> two{10, 6};
    std::vector<std::int64_t> blocks{2, 3};
    CHECK(memory_footprint(OptimizerKind::kAdamMini, two, blocks).state_scalars == 21);
}

TEST_CASE("hyperparameter validation") {
    HyperParams h;
    h.beta1 = 1.0;
    CHECK_THROWS_AS(h.validate(), ConfigError);
    h = HyperParams{};
    h.epsilon = -1.0;
    CHECK_THROWS_AS(h.validate(), ConfigError);
    auto lion = HyperParams::lion_from_adamw(HyperParams{});
    CHECK(lion.peak_lr == doctest::Approx(6e-5));
    CHECK(lion.weight_decay == doctest::Approx(1.0));
    CHECK(parse_optimizer_kind("adams") == OptimizerKind::kAdamS);
    CHECK_THROWS_AS(parse_optimizer_kind("adam"), ConfigError);
}
