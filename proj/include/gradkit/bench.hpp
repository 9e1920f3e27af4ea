#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gradkit/optimizer.hpp"
#include "gradkit/tensor.hpp"

namespace gradkit {

struct BenchProblem {
    std::string name;
    std::size_t dimension = 0;
    Tensor start;
    double min_value = 0.0;
    Tensor min_location;
    std::function<double(const Tensor&)> objective;
    std::function<Tensor(const Tensor&)> gradient;
};

/// f(x) = 0.5 * ||x||^2 from the all-ones start.
BenchProblem make_quadratic(std::size_t dim);
/// f(x, y) = (1-x)^2 + 100 (y - x^2)^2 from the classic (-1.2, 1) start.
BenchProblem make_rosenbrock();
BenchProblem make_problem(const std::string& name, std::size_t dim);

struct BenchRecord {
    long t = 0;
    double f = 0.0;          // objective after the step
    double grad_norm = 0.0;  // norm of the gradient the step consumed
    double xi_min = 1.0;
    double xi_max = 1.0;
};

struct BenchResult {
    std::vector<BenchRecord> trajectory;
    bool converged = false;
    long steps = 0;  // steps actually taken
    double final_f = 0.0;
    Tensor theta;
};

/// Full-gradient descent until f < tol or max_steps. Throws
/// std::runtime_error naming the step index if the objective turns
/// non-finite.
BenchResult bench_run(const BenchProblem& problem, const OptimConfig& cfg, long max_steps,
                      double tol);

}  // namespace gradkit
