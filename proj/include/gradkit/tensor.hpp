#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace gradkit {

/// Dense, contiguous, row-major tensor of 64-bit floats.
/// Invariant: product(shape) == data.size().
struct Tensor {
    std::vector<double> data;
    std::vector<std::size_t> shape;

    Tensor() = default;
    Tensor(std::vector<double> values, std::vector<std::size_t> dims);

    static Tensor zeros(std::vector<std::size_t> dims);
    static Tensor full(std::vector<std::size_t> dims, double value);

    std::size_t size() const { return data.size(); }
    bool same_shape(const Tensor& other) const { return shape == other.shape; }

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    // 2-D accessors; valid only when shape is {rows, cols}
    std::size_t rows() const { return shape.at(0); }
    std::size_t cols() const { return shape.at(1); }
    double& at(std::size_t r, std::size_t c) { return data[r * shape[1] + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * shape[1] + c]; }
};

std::size_t numel(const std::vector<std::size_t>& shape);
std::string shape_str(const std::vector<std::size_t>& shape);

enum class ElemOp { add, sub, mul, div, max };

/// Componentwise binary op. Throws std::invalid_argument naming both shapes
/// on mismatch. div does not guard the divisor; a zero divisor produces an
/// infinity that the finiteness checks downstream flag.
Tensor elementwise(ElemOp op, const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor maximum(const Tensor& a, const Tensor& b);

/// Componentwise unary map, shape preserved.
template <typename F>
Tensor map(F&& f, const Tensor& a) {
    Tensor out;
    out.shape = a.shape;
    out.data.resize(a.data.size());
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        out.data[i] = f(a.data[i]);
    }
    return out;
}

Tensor square(const Tensor& a);
Tensor sqrt_elem(const Tensor& a);
Tensor abs_elem(const Tensor& a);
Tensor scale(double c, const Tensor& a);

/// Maximum over all components. Throws on an empty tensor.
double reduce_max(const Tensor& a);

bool all_finite(const Tensor& a);
/// Index of the first NaN/Inf component, or size() if none.
std::size_t first_nonfinite(const Tensor& a);

// matrix products needed by the trainer; inputs must be 2-D
Tensor matmul(const Tensor& a, const Tensor& b);          // {m,k} x {k,n}
Tensor matmul_ta(const Tensor& a, const Tensor& b);       // {m,k}^T x {m,n}
Tensor matmul_tb(const Tensor& a, const Tensor& b);       // {m,k} x {n,k}^T

}  // namespace gradkit
