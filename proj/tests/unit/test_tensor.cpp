#include <doctest.h>

#include <cmath>
#include <vector>

#include "adams/tensor.hpp"

using namespace adams;

TEST_CASE("axpy reproduces the momentum line by hand") {
    Tensor m = axpy(0.9, Tensor::vector({1.0, 1.0}), elementwise(ElementwiseOp::kMul, Tensor::vector({10.0, 0.0}), 0.1));
    CHECK(m[0] == doctest::Approx(1.9).epsilon(1e-15));
    CHECK(m[1] == doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("shape mismatch is rejected") {
    CHECK_THROWS_AS(elementwise(ElementwiseOp::kAdd, Tensor::vector({1, 2}), Tensor::vector({1, 2, 3})), DimensionError);
    CHECK_THROWS_AS(dot(Tensor(Shape{2, 2}), Tensor(Shape{4})), DimensionError);
}

TEST_CASE("norms") {
    CHECK(norm(Tensor(Shape{1, 4}, 1.0)) == 2.0);
    std::vector<Tensor> ts{Tensor::vector({3.0}), Tensor::vector({4.0})};
    CHECK(global_norm(ts) == 5.0);
}

TEST_CASE("sign uses sign(0) = 0") {
    Tensor s = elementwise(ElementwiseOp::kSign, Tensor::vector({-2.0, 0.0, 3.0}));
    CHECK(s == Tensor::vector({-1.0, 0.0, 1.0}));
}

TEST_CASE("global clipping") {
    std::vector<Tensor> ts{Tensor::vector({3.0}), Tensor::vector({4.0})};
    auto r = clip_by_global_norm(ts, 1.0);
    CHECK(r.scale == doctest::Approx(0.2));
    CHECK(r.norm_before == 5.0);
    CHECK(r.clipped());
    CHECK(global_norm(ts) == doctest::Approx(1.0));

    std::vector<Tensor> small{Tensor::vector({0.3})};
    auto s = clip_by_global_norm(small, 1.0);
    CHECK_FALSE(s.clipped());
    CHECK(small[0][0] == 0.3);
}

TEST_CASE("cosine similarity") {
    Tensor a = Tensor::vector({0.1, -0.7, 3.3, 1e-9});
    CHECK(cosine_similarity(a, a).value == 1.0);
    CHECK(cosine_similarity(a, elementwise(ElementwiseOp::kMul, a, -2.0)).value == -1.0);
    auto z = cosine_similarity(a, Tensor::zeros_like(a));
    CHECK(z.degenerate);
    CHECK(cosine_similarity(Tensor::vector({1, 0}), Tensor::vector({0, 1})).value == 0.0);
}

TEST_CASE("non-finite detection") {
    CHECK(Tensor::vector({1.0, 2.0}).all_finite());
    CHECK_FALSE(Tensor::vector({1.0, std::nan("")}).all_finite());
    CHECK_FALSE(Tensor::vector({INFINITY}).all_finite());
}
