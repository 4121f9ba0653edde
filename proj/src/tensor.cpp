#include "adams/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace adams {

std::size_t shape_size(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_to_string(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ", ";
        os << shape[i];
    }
    os << ']';
    return os.str();
}

namespace {

void validate_shape(const Shape& shape) {
    if (shape.empty()) throw DimensionError("tensor shape must have at least one dimension");
    for (std::size_t d : shape) {
        if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_to_string(shape));
    }
}

double apply_unary(ElementwiseOp op, double x) {
    switch (op) {
        case ElementwiseOp::kSquare: return x * x;
        case ElementwiseOp::kSqrt: return std::sqrt(x);
        case ElementwiseOp::kAbs: return std::fabs(x);
        case ElementwiseOp::kSign: return sign(x);
        default: throw std::invalid_argument("not a unary elementwise op");
    }
}

double apply_binary(ElementwiseOp op, double x, double y) {
    switch (op) {
        case ElementwiseOp::kAdd: return x + y;
        case ElementwiseOp::kSub: return x - y;
        case ElementwiseOp::kMul: return x * y;
        case ElementwiseOp::kDiv: return x / y;
        default: return apply_unary(op, x);
    }
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
    validate_shape(shape_);
    data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    validate_shape(shape_);
    if (shape_size(shape_) != data_.size()) {
        throw DimensionError("shape " + shape_to_string(shape_) + " does not match " +
                             std::to_string(data_.size()) + " elements");
    }
}

Tensor Tensor::vector(std::initializer_list<double> values) {
    return Tensor(Shape{values.size()}, std::vector<double>(values));
}

bool Tensor::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(what) + ": shape mismatch " + shape_to_string(a.shape()) + " vs " +
                             shape_to_string(b.shape()));
    }
}

Tensor elementwise(ElementwiseOp op, const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "elementwise");
    Tensor out = Tensor::zeros_like(a);
    auto o = out.data();
    auto x = a.data();
    auto y = b.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = apply_binary(op, x[i], y[i]);
    return out;
}

Tensor elementwise(ElementwiseOp op, const Tensor& a, double b) {
    Tensor out = Tensor::zeros_like(a);
    auto o = out.data();
    auto x = a.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = apply_binary(op, x[i], b);
    return out;
}

Tensor elementwise(ElementwiseOp op, const Tensor& a) {
    Tensor out = Tensor::zeros_like(a);
    auto o = out.data();
    auto x = a.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = apply_unary(op, x[i]);
    return out;
}

Tensor axpy(double alpha, const Tensor& x, const Tensor& y) {
    require_same_shape(x, y, "axpy");
    Tensor out = Tensor::zeros_like(x);
    auto o = out.data();
    auto xs = x.data();
    auto ys = y.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = alpha * xs[i] + ys[i];
    return out;
}

double dot(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "dot");
    double acc = 0.0;
    auto x = a.data();
    auto y = b.data();
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
    return acc;
}

double sum_squares(const Tensor& a) noexcept {
    double acc = 0.0;
    for (double x : a.data()) acc += x * x;
    return acc;
}

double norm(const Tensor& a) noexcept { return std::sqrt(sum_squares(a)); }

double global_norm(std::span<const Tensor> tensors) {
    if (tensors.empty()) throw std::invalid_argument("global_norm: empty tensor list");
    double acc = 0.0;
    for (const auto& t : tensors) acc += sum_squares(t);
    return std::sqrt(acc);
}

ClipResult clip_by_global_norm(std::span<Tensor> tensors, double threshold) {
    if (!(threshold > 0.0)) throw std::invalid_argument("clip_by_global_norm: threshold must be positive");
    ClipResult result;
    result.norm_before = global_norm(std::span<const Tensor>(tensors.data(), tensors.size()));
    if (result.norm_before <= threshold) return result;
    result.scale = threshold / result.norm_before;
    for (auto& t : tensors) {
        for (double& x : t.data()) x *= result.scale;
    }
    return result;
}

CosineResult cosine_similarity(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "cosine_similarity");
    return cosine_similarity(std::span<const Tensor>(&a, 1), std::span<const Tensor>(&b, 1));
}

CosineResult cosine_similarity(std::span<const Tensor> a, std::span<const Tensor> b) {
    if (a.size() != b.size()) throw DimensionError("cosine_similarity: tensor list length mismatch");
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += dot(a[i], b[i]);
        aa += sum_squares(a[i]);
        bb += sum_squares(b[i]);
    }
    if (aa == 0.0 || bb == 0.0) return {0.0, true};
    // sqrt(aa * bb) rather than sqrt(aa) * sqrt(bb): identical inputs give exactly 1.
    double c = ab / std::sqrt(aa * bb);
    return {std::clamp(c, -1.0, 1.0), false};
}

}  // namespace adams
