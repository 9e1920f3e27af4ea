#include "gradkit/bench.hpp"

#include <cmath>
#include <stdexcept>

namespace gradkit {

BenchProblem make_quadratic(std::size_t dim) {
    if (dim == 0) throw std::invalid_argument("quadratic needs a positive dimension");
    BenchProblem p;
    p.name = "quadratic";
    p.dimension = dim;
    p.start = Tensor::full({dim}, 1.0);
    p.min_value = 0.0;
    p.min_location = Tensor::zeros({dim});
    p.objective = [](const Tensor& th) {
        double s = 0.0;
        for (double v : th.data) s += v * v;
        return 0.5 * s;
    };
    p.gradient = [](const Tensor& th) { return th; };
    return p;
}

BenchProblem make_rosenbrock() {
    BenchProblem p;
    p.name = "rosenbrock";
    p.dimension = 2;
    p.start = Tensor({-1.2, 1.0}, {2});
    p.min_value = 0.0;
    p.min_location = Tensor({1.0, 1.0}, {2});
    p.objective = [](const Tensor& th) {
        const double x = th.data[0];
        const double y = th.data[1];
        const double a = 1.0 - x;
        const double b = y - x * x;
        return a * a + 100.0 * b * b;
    };
    p.gradient = [](const Tensor& th) {
        const double x = th.data[0];
        const double y = th.data[1];
        const double b = y - x * x;
        return Tensor({-2.0 * (1.0 - x) - 400.0 * x * b, 200.0 * b}, {2});
    };
    return p;
}

BenchProblem make_problem(const std::string& name, std::size_t dim) {
    if (name == "quadratic") return make_quadratic(dim == 0 ? 10 : dim);
    if (name == "rosenbrock") return make_rosenbrock();
    throw std::invalid_argument("unknown benchmark problem \"" + name +
                                "\"; expected quadratic or rosenbrock");
}

BenchResult bench_run(const BenchProblem& problem, const OptimConfig& cfg, long max_steps,
                      double tol) {
    if (max_steps < 1) throw std::invalid_argument("max_steps must be at least 1");
    cfg.validate();
    BenchResult res;
    res.theta = problem.start;
    OptimState state = OptimState::for_shape(res.theta.shape);
    for (long t = 1; t <= max_steps; ++t) {
        const Tensor g = problem.gradient(res.theta);
        double gn = 0.0;
        for (double v : g.data) gn += v * v;
        gn = std::sqrt(gn);
        StepTrace trace;
        res.theta = step(res.theta, g, state, cfg, &trace);
        const double f = problem.objective(res.theta);
        if (!std::isfinite(f)) {
            throw std::runtime_error("objective became non-finite at step " + std::to_string(t) +
                                     " on " + problem.name);
        }
        res.trajectory.push_back({t, f, gn, trace.xi_min, trace.xi_max});
        res.steps = t;
        res.final_f = f;
        if (f < tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

}  // namespace gradkit
