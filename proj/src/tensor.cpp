#include "gradkit/tensor.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gradkit {

std::size_t numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i > 0) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

Tensor::Tensor(std::vector<double> values, std::vector<std::size_t> dims)
    : data(std::move(values)), shape(std::move(dims)) {
    for (std::size_t d : shape) {
        if (d == 0) {
            throw std::invalid_argument("tensor: zero dimension in shape " + shape_str(shape));
        }
    }
    if (numel(shape) != data.size()) {
        throw std::invalid_argument("tensor: shape " + shape_str(shape) + " does not match buffer of " +
                                    std::to_string(data.size()) + " elements");
    }
}

Tensor Tensor::zeros(std::vector<std::size_t> dims) {
    return full(std::move(dims), 0.0);
}

Tensor Tensor::full(std::vector<std::size_t> dims, double value) {
    Tensor t;
    t.shape = std::move(dims);
    t.data.assign(numel(t.shape), value);
    return t;
}

namespace {

void require_same_shape(const char* what, const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(what) + ": shape mismatch " + shape_str(a.shape) +
                                    " vs " + shape_str(b.shape));
    }
}

}  // namespace

Tensor elementwise(ElemOp op, const Tensor& a, const Tensor& b) {
    require_same_shape("elementwise", a, b);
    Tensor out;
    out.shape = a.shape;
    out.data.resize(a.data.size());
    const double* pa = a.data.data();
    const double* pb = b.data.data();
    double* po = out.data.data();
    const std::size_t n = a.data.size();
    switch (op) {
        case ElemOp::add:
            for (std::size_t i = 0; i < n; ++i) po[i] = pa[i] + pb[i];
            break;
        case ElemOp::sub:
            for (std::size_t i = 0; i < n; ++i) po[i] = pa[i] - pb[i];
            break;
        case ElemOp::mul:
            for (std::size_t i = 0; i < n; ++i) po[i] = pa[i] * pb[i];
            break;
        case ElemOp::div:
            for (std::size_t i = 0; i < n; ++i) po[i] = pa[i] / pb[i];
            break;
        case ElemOp::max:
            for (std::size_t i = 0; i < n; ++i) po[i] = pa[i] > pb[i] ? pa[i] : pb[i];
            break;
    }
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) { return elementwise(ElemOp::add, a, b); }
Tensor sub(const Tensor& a, const Tensor& b) { return elementwise(ElemOp::sub, a, b); }
Tensor mul(const Tensor& a, const Tensor& b) { return elementwise(ElemOp::mul, a, b); }
Tensor div(const Tensor& a, const Tensor& b) { return elementwise(ElemOp::div, a, b); }
Tensor maximum(const Tensor& a, const Tensor& b) { return elementwise(ElemOp::max, a, b); }

Tensor square(const Tensor& a) {
    return map([](double x) { return x * x; }, a);
}

Tensor sqrt_elem(const Tensor& a) {
    return map([](double x) { return std::sqrt(x); }, a);
}

Tensor abs_elem(const Tensor& a) {
    return map([](double x) { return std::fabs(x); }, a);
}

Tensor scale(double c, const Tensor& a) {
    return map([c](double x) { return c * x; }, a);
}

double reduce_max(const Tensor& a) {
    if (a.data.empty()) {
        throw std::invalid_argument("reduce_max: empty tensor");
    }
    double m = a.data[0];
    for (std::size_t i = 1; i < a.data.size(); ++i) {
        if (a.data[i] > m) m = a.data[i];
    }
    return m;
}

bool all_finite(const Tensor& a) {
    return first_nonfinite(a) == a.data.size();
}

std::size_t first_nonfinite(const Tensor& a) {
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        if (!std::isfinite(a.data[i])) return i;
    }
    return a.data.size();
}

namespace {

void require_2d(const char* what, const Tensor& t) {
    if (t.shape.size() != 2) {
        throw std::invalid_argument(std::string(what) + ": expected 2-D tensor, got shape " +
                                    shape_str(t.shape));
    }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_2d("matmul", a);
    require_2d("matmul", b);
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("matmul: inner dimension mismatch " + shape_str(a.shape) +
                                    " x " + shape_str(b.shape));
    }
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    Tensor out = Tensor::zeros({m, n});
    const double* pa = a.data.data();
    const double* pb = b.data.data();
    double* po = out.data.data();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double aik = pa[i * k + kk];
            const double* brow = pb + kk * n;
            double* orow = po + i * n;
            for (std::size_t j = 0; j < n; ++j) {
                orow[j] += aik * brow[j];
            }
        }
    }
    return out;
}

Tensor matmul_ta(const Tensor& a, const Tensor& b) {
    require_2d("matmul_ta", a);
    require_2d("matmul_ta", b);
    if (a.rows() != b.rows()) {
        throw std::invalid_argument("matmul_ta: leading dimension mismatch " + shape_str(a.shape) +
                                    "^T x " + shape_str(b.shape));
    }
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    Tensor out = Tensor::zeros({k, n});
    const double* pa = a.data.data();
    const double* pb = b.data.data();
    double* po = out.data.data();
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = pa + i * k;
        const double* brow = pb + i * n;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double aik = arow[kk];
            double* orow = po + kk * n;
            for (std::size_t j = 0; j < n; ++j) {
                orow[j] += aik * brow[j];
            }
        }
    }
    return out;
}

Tensor matmul_tb(const Tensor& a, const Tensor& b) {
    require_2d("matmul_tb", a);
    require_2d("matmul_tb", b);
    if (a.cols() != b.cols()) {
        throw std::invalid_argument("matmul_tb: trailing dimension mismatch " + shape_str(a.shape) +
                                    " x " + shape_str(b.shape) + "^T");
    }
    const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
    Tensor out = Tensor::zeros({m, n});
    const double* pa = a.data.data();
    const double* pb = b.data.data();
    double* po = out.data.data();
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = pa + i * k;
        double* orow = po + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = pb + j * k;
            double acc = 0.0;
            for (std::size_t kk = 0; kk < k; ++kk) {
                acc += arow[kk] * brow[kk];
            }
            orow[j] = acc;
        }
    }
    return out;
}

}  // namespace gradkit
