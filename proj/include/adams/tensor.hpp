#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace adams {

using Shape = std::vector<std::size_t>;

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NonFiniteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::size_t shape_size(const Shape& shape);
std::string shape_to_string(const Shape& shape);

/// Dense row-major array of doubles. Shape is metadata; all math is flat.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> data);

    /// 1-D tensor from a literal list.
    static Tensor vector(std::initializer_list<double> values);
    static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    bool all_finite() const noexcept;
    bool same_shape(const Tensor& other) const noexcept { return shape_ == other.shape_; }

    friend bool operator==(const Tensor& a, const Tensor& b) = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

enum class ElementwiseOp { kAdd, kSub, kMul, kDiv, kSquare, kSqrt, kAbs, kSign };

/// Binary op against a tensor of identical shape.
Tensor elementwise(ElementwiseOp op, const Tensor& a, const Tensor& b);
/// Binary op against a scalar; unary ops ignore `b`.
Tensor elementwise(ElementwiseOp op, const Tensor& a, double b);
/// Unary ops (square, sqrt, abs, sign).
Tensor elementwise(ElementwiseOp op, const Tensor& a);

/// alpha * x + y
Tensor axpy(double alpha, const Tensor& x, const Tensor& y);

inline double sign(double x) noexcept { return (x > 0.0) - (x < 0.0); }

double dot(const Tensor& a, const Tensor& b);
double sum_squares(const Tensor& a) noexcept;
double norm(const Tensor& a) noexcept;

double global_norm(std::span<const Tensor> tensors);

struct ClipResult {
    double scale = 1.0;
    double norm_before = 0.0;
    bool clipped() const noexcept { return scale < 1.0; }
};

/// Rescales every tensor by threshold/global_norm when the norm exceeds threshold.
ClipResult clip_by_global_norm(std::span<Tensor> tensors, double threshold);

struct CosineResult {
    double value = 0.0;
    bool degenerate = false;  // one of the inputs had zero norm
};

CosineResult cosine_similarity(const Tensor& a, const Tensor& b);
/// Cosine of the concatenation of all tensors in each list.
CosineResult cosine_similarity(std::span<const Tensor> a, std::span<const Tensor> b);

void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

}  // namespace adams
