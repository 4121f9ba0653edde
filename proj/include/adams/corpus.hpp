#pragma once

#include <cstdint>
#include <vector>

#include "adams/random.hpp"

namespace adams {

using Token = std::int32_t;

/// Order-1 Markov chain over V tokens; row i of `transition` is P(next | i) and sums to 1.
struct MarkovChain {
    std::size_t vocab = 0;
    std::vector<double> transition;  // row-major vocab x vocab

    /// Rows are softmax(sharpness * z) with z standard normal.
    static MarkovChain random(std::size_t vocab, std::uint64_t seed, double sharpness = 2.0);
    /// Each row puts `row_max` on one seeded successor and spreads the rest uniformly.
    static MarkovChain peaked(std::size_t vocab, std::uint64_t seed, double row_max = 0.97);

    double p(std::size_t from, std::size_t to) const { return transition[from * vocab + to]; }
    void validate() const;
    std::vector<double> stationary() const;
    /// sum_i pi_i H(P(. | i)) in nats.
    double entropy_rate() const;
    std::vector<Token> generate(std::uint64_t seed, std::size_t length) const;
};

struct SynthCorpus {
    MarkovChain chain;
    std::vector<Token> tokens;
};

enum class ChainKind { kRandom, kPeaked };

struct CorpusOptions {
    std::size_t vocab = 16;
    ChainKind kind = ChainKind::kRandom;
    double sharpness = 2.0;  // kRandom
    double row_max = 0.97;   // kPeaked
};

/// Deterministic in (seed, length, options).
SynthCorpus gen_corpus(std::uint64_t seed, std::size_t length, const CorpusOptions& options = {});

/// B windows of k context tokens with the following token as target.
struct Batch {
    std::size_t context = 0;
    std::vector<Token> contexts;  // B x context, row-major
    std::vector<Token> targets;   // B

    std::size_t size() const noexcept { return targets.size(); }
    /// Throws std::invalid_argument on inconsistent sizes or tokens outside [0, vocab).
    void validate(std::size_t vocab) const;
};

/// Windows starting at uniformly drawn offsets of `stream`.
Batch sample_batch(const std::vector<Token>& stream, std::size_t context, std::size_t batch_size, CounterRng& rng);
/// Windows at the given offsets.
Batch batch_at(const std::vector<Token>& stream, std::size_t context, const std::vector<std::size_t>& offsets);

}  // namespace adams
