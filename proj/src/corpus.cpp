#include "adams/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace adams {

MarkovChain MarkovChain::random(std::size_t vocab, std::uint64_t seed, double sharpness) {
    if (vocab < 2) throw std::invalid_argument("MarkovChain: vocab must be >= 2");
    if (!(sharpness >= 0.0)) throw std::invalid_argument("MarkovChain: sharpness must be >= 0");
    MarkovChain c;
    c.vocab = vocab;
    c.transition.resize(vocab * vocab);
    CounterRng rng(derive_seed(seed, 11), 0);
    for (std::size_t i = 0; i < vocab; ++i) {
        double* row = &c.transition[i * vocab];
        double mx = -INFINITY;
        for (std::size_t j = 0; j < vocab; ++j) {
            row[j] = sharpness * rng.normal();
            mx = std::max(mx, row[j]);
        }
        double total = 0.0;
        for (std::size_t j = 0; j < vocab; ++j) total += (row[j] = std::exp(row[j] - mx));
        for (std::size_t j = 0; j < vocab; ++j) row[j] /= total;
    }
    return c;
}

MarkovChain MarkovChain::peaked(std::size_t vocab, std::uint64_t seed, double row_max) {
    if (vocab < 2) throw std::invalid_argument("MarkovChain: vocab must be >= 2");
    double rest = (1.0 - row_max) / static_cast<double>(vocab - 1);
    if (!(row_max > rest && row_max < 1.0)) throw std::invalid_argument("MarkovChain: row_max must lie in (1/V, 1)");
    MarkovChain c;
    c.vocab = vocab;
    c.transition.assign(vocab * vocab, rest);
    CounterRng rng(derive_seed(seed, 12), 0);
    for (std::size_t i = 0; i < vocab; ++i) c.transition[i * vocab + rng.below(vocab)] = row_max;
    return c;
}

void MarkovChain::validate() const {
    if (vocab < 2 || transition.size() != vocab * vocab) throw std::invalid_argument("MarkovChain: bad shape");
    for (std::size_t i = 0; i < vocab; ++i) {
        double total = 0.0;
        for (std::size_t j = 0; j < vocab; ++j) {
            double v = p(i, j);
            if (!(v >= 0.0)) throw std::invalid_argument("MarkovChain: negative transition probability");
            total += v;
        }
        if (std::fabs(total - 1.0) > 1e-12) {
            throw std::invalid_argument("MarkovChain: row " + std::to_string(i) + " does not sum to 1");
        }
    }
}

std::vector<double> MarkovChain::stationary() const {
    std::vector<double> pi(vocab, 1.0 / static_cast<double>(vocab)), next(vocab);
    for (int it = 0; it < 100000; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t i = 0; i < vocab; ++i) {
            for (std::size_t j = 0; j < vocab; ++j) next[j] += pi[i] * p(i, j);
        }
        double diff = 0.0;
        for (std::size_t j = 0; j < vocab; ++j) diff = std::max(diff, std::fabs(next[j] - pi[j]));
        pi.swap(next);
        if (diff < 1e-15) break;
    }
    return pi;
}

double MarkovChain::entropy_rate() const {
    auto pi = stationary();
    double h = 0.0;
    for (std::size_t i = 0; i < vocab; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < vocab; ++j) {
            double q = p(i, j);
            if (q > 0.0) row -= q * std::log(q);
        }
        h += pi[i] * row;
    }
    return h;
}

std::vector<Token> MarkovChain::generate(std::uint64_t seed, std::size_t length) const {
    validate();
    std::vector<Token> out;
    out.reserve(length);
    if (length == 0) return out;
    CounterRng rng(derive_seed(seed, 13), 0);
    auto draw = [&](const double* probs) {
        double u = rng.uniform();
        double acc = 0.0;
        for (std::size_t j = 0; j + 1 < vocab; ++j) {
            acc += probs[j];
            if (u < acc) return static_cast<Token>(j);
        }
        return static_cast<Token>(vocab - 1);
    };
    auto pi = stationary();
    Token cur = draw(pi.data());
    out.push_back(cur);
    while (out.size() < length) {
        cur = draw(&transition[static_cast<std::size_t>(cur) * vocab]);
        out.push_back(cur);
    }
    return out;
}

SynthCorpus gen_corpus(std::uint64_t seed, std::size_t length, const CorpusOptions& options) {
    SynthCorpus c;
    c.chain = options.kind == ChainKind::kRandom ? MarkovChain::random(options.vocab, seed, options.sharpness)
                                                 : MarkovChain::peaked(options.vocab, seed, options.row_max);
    c.tokens = c.chain.generate(seed, length);
    return c;
}

void Batch::validate(std::size_t vocab) const {
    if (context == 0) throw std::invalid_argument("batch: context length must be positive");
    if (targets.empty()) throw std::invalid_argument("batch: empty");
    if (contexts.size() != targets.size() * context) throw std::invalid_argument("batch: context matrix size mismatch");
    auto bad = [vocab](Token t) { return t < 0 || static_cast<std::size_t>(t) >= vocab; };
    if (std::any_of(contexts.begin(), contexts.end(), bad) || std::any_of(targets.begin(), targets.end(), bad)) {
        throw std::invalid_argument("batch: token outside [0, " + std::to_string(vocab) + ")");
    }
}

Batch batch_at(const std::vector<Token>& stream, std::size_t context, const std::vector<std::size_t>& offsets) {
    Batch b;
    b.context = context;
    b.contexts.reserve(offsets.size() * context);
    b.targets.reserve(offsets.size());
    for (std::size_t off : offsets) {
        if (off + context >= stream.size()) throw std::out_of_range("batch_at: window runs past the stream");
        b.contexts.insert(b.contexts.end(), stream.begin() + static_cast<std::ptrdiff_t>(off),
                          stream.begin() + static_cast<std::ptrdiff_t>(off + context));
        b.targets.push_back(stream[off + context]);
    }
    return b;
}

Batch sample_batch(const std::vector<Token>& stream, std::size_t context, std::size_t batch_size, CounterRng& rng) {
    if (stream.size() < context + 1) throw std::invalid_argument("sample_batch: stream shorter than context + 1");
    std::vector<std::size_t> offsets(batch_size);
    const std::uint64_t windows = stream.size() - context;
    for (auto& o : offsets) o = static_cast<std::size_t>(rng.below(windows));
    return batch_at(stream, context, offsets);
}

}  // namespace adams
