#include "adams/tiny_lm.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>

#include "adams/random.hpp"

namespace adams {

namespace {

std::atomic<std::uint64_t> next_model_id{1};

std::vector<Shape> param_shapes(const TinyLmConfig& c) {
    return {{c.vocab, c.embed}, {c.context * c.embed, c.hidden}, {c.hidden}, {c.hidden, c.vocab}, {c.vocab}};
}

}  // namespace

void TinyLmConfig::validate() const {
    if (vocab < 2 || context == 0 || embed == 0 || hidden == 0) {
        throw std::invalid_argument("TinyLmConfig: vocab >= 2 and positive context/embed/hidden required");
    }
}

std::size_t TinyLmConfig::param_count() const noexcept {
    return vocab * embed + context * embed * hidden + hidden + hidden * vocab + vocab;
}

const std::vector<std::string>& TinyLm::param_names() {
    static const std::vector<std::string> names{"embedding", "hidden.weight", "hidden.bias", "output.weight",
                                                "output.bias"};
    return names;
}

TinyLm::TinyLm(const TinyLmConfig& config, std::vector<Tensor> params)
    : config_(config), params_(std::move(params)), id_(next_model_id.fetch_add(1)) {
    config_.validate();
    auto shapes = param_shapes(config_);
    if (params_.size() != shapes.size()) throw DimensionError("TinyLm: expected 5 parameter tensors");
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        if (params_[i].shape() != shapes[i]) {
            throw DimensionError("TinyLm: parameter " + param_names()[i] + " has shape " +
                                 shape_to_string(params_[i].shape()) + ", expected " + shape_to_string(shapes[i]));
        }
    }
}

TinyLm TinyLm::init(const TinyLmConfig& config, std::uint64_t seed) {
    config.validate();
    auto shapes = param_shapes(config);
    std::vector<Tensor> params;
    const std::size_t fan_in[] = {config.vocab, config.context * config.embed, 0, config.hidden, 0};
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        Tensor t(shapes[i]);
        if (fan_in[i] > 0) {
            CounterRng rng(derive_seed(seed, 100 + i), 0);
            double limit = 1.0 / std::sqrt(static_cast<double>(fan_in[i]));
            for (double& x : t.data()) x = rng.uniform(-limit, limit);
        }
        params.push_back(std::move(t));
    }
    return TinyLm(config, std::move(params));
}

TinyLm::Forward TinyLm::forward_loss(const Batch& batch) const {
    batch.validate(config_.vocab);
    if (batch.context != config_.context) throw DimensionError("TinyLm: batch context length mismatch");
    const std::size_t B = batch.size(), V = config_.vocab, K = config_.context, E = config_.embed,
                      H = config_.hidden, KE = K * E;
    const auto emb = params_[kEmbedding].data();
    const auto w1 = params_[kHiddenW].data();
    const auto b1 = params_[kHiddenB].data();
    const auto w2 = params_[kOutputW].data();
    const auto b2 = params_[kOutputB].data();

    Forward out;
    Cache& c = out.cache;
    c.model_id = id_;
    c.generation = generation_;
    c.batch = batch;
    c.inputs.resize(B * KE);
    c.hidden.resize(B * H);
    c.probs.resize(B * V);

    double total = 0.0;
    std::vector<double> logits(V);
    for (std::size_t b = 0; b < B; ++b) {
        double* x = &c.inputs[b * KE];
        for (std::size_t j = 0; j < K; ++j) {
            auto tok = static_cast<std::size_t>(batch.contexts[b * K + j]);
            std::copy_n(&emb[tok * E], E, x + j * E);
        }
        double* a = &c.hidden[b * H];
        std::copy_n(b1.data(), H, a);
        for (std::size_t i = 0; i < KE; ++i) {
            const double xi = x[i];
            const double* row = &w1[i * H];
            for (std::size_t o = 0; o < H; ++o) a[o] += xi * row[o];
        }
        for (std::size_t o = 0; o < H; ++o) a[o] = std::tanh(a[o]);
        std::copy_n(b2.data(), V, logits.begin());
        for (std::size_t i = 0; i < H; ++i) {
            const double ai = a[i];
            const double* row = &w2[i * V];
            for (std::size_t v = 0; v < V; ++v) logits[v] += ai * row[v];
        }
        double mx = *std::max_element(logits.begin(), logits.end());
        double z = 0.0;
        double* p = &c.probs[b * V];
        for (std::size_t v = 0; v < V; ++v) z += (p[v] = std::exp(logits[v] - mx));
        for (std::size_t v = 0; v < V; ++v) p[v] /= z;
        total += mx + std::log(z) - logits[static_cast<std::size_t>(batch.targets[b])];
    }
    out.loss = total / static_cast<double>(B);
    return out;
}

std::vector<Tensor> TinyLm::backward(const Cache& c) const {
    if (c.model_id != id_ || c.generation != generation_) {
        throw StaleCacheError("TinyLm::backward: cache does not match the current parameters");
    }
    const std::size_t B = c.batch.size(), V = config_.vocab, K = config_.context, E = config_.embed,
                      H = config_.hidden, KE = K * E;
    const auto w1 = params_[kHiddenW].data();
    const auto w2 = params_[kOutputW].data();

    std::vector<Tensor> grads;
    for (const auto& p : params_) grads.push_back(Tensor::zeros_like(p));
    auto gE = grads[kEmbedding].data();
    auto gW1 = grads[kHiddenW].data();
    auto gb1 = grads[kHiddenB].data();
    auto gW2 = grads[kOutputW].data();
    auto gb2 = grads[kOutputB].data();

    const double inv_b = 1.0 / static_cast<double>(B);
    std::vector<double> dlogits(V), dz(H), dx(KE);
    for (std::size_t b = 0; b < B; ++b) {
        const double* p = &c.probs[b * V];
        const double* a = &c.hidden[b * H];
        const double* x = &c.inputs[b * KE];
        for (std::size_t v = 0; v < V; ++v) dlogits[v] = p[v] * inv_b;
        dlogits[static_cast<std::size_t>(c.batch.targets[b])] -= inv_b;

        for (std::size_t v = 0; v < V; ++v) gb2[v] += dlogits[v];
        for (std::size_t i = 0; i < H; ++i) {
            const double ai = a[i];
            double* grow = &gW2[i * V];
            const double* wrow = &w2[i * V];
            double da = 0.0;
            for (std::size_t v = 0; v < V; ++v) {
                grow[v] += ai * dlogits[v];
                da += wrow[v] * dlogits[v];
            }
            dz[i] = da * (1.0 - ai * ai);
        }
        for (std::size_t o = 0; o < H; ++o) gb1[o] += dz[o];
        for (std::size_t i = 0; i < KE; ++i) {
            const double xi = x[i];
            double* grow = &gW1[i * H];
            const double* wrow = &w1[i * H];
            double acc = 0.0;
            for (std::size_t o = 0; o < H; ++o) {
                grow[o] += xi * dz[o];
                acc += wrow[o] * dz[o];
            }
            dx[i] = acc;
        }
        for (std::size_t j = 0; j < K; ++j) {
            auto tok = static_cast<std::size_t>(c.batch.contexts[b * K + j]);
            for (std::size_t e = 0; e < E; ++e) gE[tok * E + e] += dx[j * E + e];
        }
    }
    return grads;
}

std::uint64_t TinyLm::checksum() const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& t : params_) {
        for (double x : t.data()) {
            auto bits = std::bit_cast<std::uint64_t>(x);
            for (int i = 0; i < 8; ++i) {
                h ^= (bits >> (8 * i)) & 0xffU;
                h *= 0x100000001b3ULL;
            }
        }
    }
    return h;
}

}  // namespace adams
