#include <doctest.h>

#include <cmath>
#include <numeric>

#include "adams/corpus.hpp"
#include "adams/random.hpp"

using namespace adams;

TEST_CASE("chains are stochastic matrices") {
    for (const auto& c : {MarkovChain::random(16, 1), MarkovChain::peaked(16, 1, 0.97)}) {
        c.validate();
        for (std::size_t i = 0; i < c.vocab; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < c.vocab; ++j) row += c.p(i, j);
            CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    auto pk = MarkovChain::peaked(8, 2, 0.97);
    for (std::size_t i = 0; i < 8; ++i) {
        double mx = 0.0;
        for (std::size_t j = 0; j < 8; ++j) mx = std::max(mx, pk.p(i, j));
        CHECK(mx == doctest::Approx(0.97));
    }
}

TEST_CASE("unigram frequencies match the stationary distribution") {
    auto corpus = gen_corpus(4, 100000);
    auto pi = corpus.chain.stationary();
    std::vector<double> counts(16, 0.0);
    for (Token t : corpus.tokens) counts[static_cast<std::size_t>(t)] += 1.0;
    const double n = static_cast<double>(corpus.tokens.size());
    for (std::size_t i = 0; i < 16; ++i) {
        // Markov dependence inflates the variance; the chain mixes in a few steps, so a factor 2 covers it.
        double se = 2.0 * std::sqrt(pi[i] * (1.0 - pi[i]) / n);
        CHECK(std::fabs(counts[i] / n - pi[i]) < 4.0 * se);
    }
}

TEST_CASE("corpus and batches are deterministic and valid") {
    auto a = gen_corpus(9, 5000);
    auto b = gen_corpus(9, 5000);
    CHECK(a.tokens == b.tokens);
    CHECK(a.tokens != gen_corpus(10, 5000).tokens);
    CounterRng r1(1, 0), r2(1, 0);
    auto x = sample_batch(a.tokens, 8, 32, r1);
    auto y = sample_batch(a.tokens, 8, 32, r2);
    CHECK(x.contexts == y.contexts);
    CHECK(x.targets == y.targets);
    x.validate(16);
    CHECK(x.size() == 32);
    auto z = batch_at(a.tokens, 3, {0});
    CHECK(z.targets[0] == a.tokens[3]);
    CHECK(std::vector<Token>(z.contexts.begin(), z.contexts.end()) ==
          std::vector<Token>(a.tokens.begin(), a.tokens.begin() + 3));
    Batch bad = z;
    bad.targets[0] = 99;
    CHECK_THROWS(bad.validate(16));
}

TEST_CASE("entropy rate bounds") {
    auto c = MarkovChain::random(16, 3);
    CHECK(c.entropy_rate() > 0.0);
    CHECK(c.entropy_rate() < std::log(16.0));
    CHECK(MarkovChain::peaked(16, 3, 0.97).entropy_rate() < c.entropy_rate());
}
