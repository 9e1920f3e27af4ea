#include <cmath>
#include <limits>
#include <stdexcept>

#include "doctest.h"
#include "gradkit/tensor.hpp"

using namespace gradkit;

TEST_SUITE_BEGIN("tensor");

TEST_CASE("construction checks element count against shape") {
    CHECK_NOTHROW(Tensor({1.0, 2.0, 3.0, 4.0, 5.0, 6.0}, {2, 3}));
    CHECK_THROWS_AS(Tensor({1.0, 2.0}, {2, 3}), std::invalid_argument);
    const Tensor scalar({7.0}, {});
    CHECK(scalar.size() == 1);
}

TEST_CASE("elementwise ops require matching shapes") {
    const Tensor a({1.0, 2.0, 3.0}, {3});
    const Tensor b({4.0, 5.0, 6.0}, {3});
    const Tensor c = add(a, b);
    CHECK(c.data == std::vector<double>{5.0, 7.0, 9.0});
    CHECK(sub(b, a).data == std::vector<double>{3.0, 3.0, 3.0});
    CHECK(mul(a, b).data == std::vector<double>{4.0, 10.0, 18.0});
    CHECK(div(b, a).data == std::vector<double>{4.0, 2.5, 2.0});
    CHECK(maximum(a, Tensor({2.0, 2.0, 2.0}, {3})).data == std::vector<double>{2.0, 2.0, 3.0});
    CHECK_THROWS_AS(add(a, Tensor({1.0}, {1})), std::invalid_argument);
}

TEST_CASE("unary maps") {
    const Tensor a({-2.0, 0.0, 3.0}, {3});
    CHECK(square(a).data == std::vector<double>{4.0, 0.0, 9.0});
    CHECK(abs_elem(a).data == std::vector<double>{2.0, 0.0, 3.0});
    CHECK(scale(0.5, a).data == std::vector<double>{-1.0, 0.0, 1.5});
    const Tensor s = sqrt_elem(Tensor({4.0, 9.0}, {2}));
    CHECK(s.data == std::vector<double>{2.0, 3.0});
}

TEST_CASE("reduce_max scans every element") {
    CHECK(reduce_max(Tensor({-5.0, -2.0, -9.0}, {3})) == -2.0);
    CHECK(reduce_max(Tensor({0.0}, {1})) == 0.0);
}

TEST_CASE("finiteness scan reports the first offender") {
    Tensor a({1.0, 2.0, 3.0}, {3});
    CHECK(all_finite(a));
    a.data[1] = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(all_finite(a));
    CHECK(first_nonfinite(a) == 1);
    a.data[1] = std::numeric_limits<double>::infinity();
    CHECK(first_nonfinite(a) == 1);
}

TEST_CASE("matmul against a hand-worked product") {
    // [[1 2 3],[4 5 6]] x [[7 8],[9 10],[11 12]] = [[58 64],[139 154]]
    const Tensor a({1, 2, 3, 4, 5, 6}, {2, 3});
    const Tensor b({7, 8, 9, 10, 11, 12}, {3, 2});
    const Tensor c = matmul(a, b);
    CHECK(c.shape == std::vector<std::size_t>{2, 2});
    CHECK(c.data == std::vector<double>{58, 64, 139, 154});
    CHECK_THROWS_AS(matmul(a, a), std::invalid_argument);
}

TEST_CASE("transposed products agree with explicit transposition") {
    const Tensor a({1, -2, 0.5, 3, 4, -1}, {3, 2});
    const Tensor b({2, 1, 0, -1, 1, 5}, {3, 2});
    // a^T b computed via matmul on a manually transposed copy
    Tensor at({0, 0, 0, 0, 0, 0}, {2, 3});
    for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t c = 0; c < 2; ++c) at.at(c, r) = a.at(r, c);
    }
    const Tensor want_ta = matmul(at, b);
    const Tensor got_ta = matmul_ta(a, b);
    CHECK(got_ta.shape == want_ta.shape);
    CHECK(got_ta.data == want_ta.data);
}

TEST_CASE("matmul_tb multiplies by the transpose of its second argument") {
    const Tensor a({1, 2, 3, 4}, {2, 2});
    const Tensor b({5, 6, 7, 8}, {2, 2});
    Tensor bt({5, 7, 6, 8}, {2, 2});
    const Tensor want = matmul(a, bt);
    const Tensor got = matmul_tb(a, b);
    CHECK(got.shape == want.shape);
    CHECK(got.data == want.data);
}

TEST_CASE("shape_str formats like a bracketed list") {
    CHECK(shape_str({2, 3}) == "[2,3]");
    CHECK(shape_str({}) == "[]");
    CHECK(numel({2, 3, 4}) == 24);
    CHECK(numel({}) == 1);
}

TEST_SUITE_END();
