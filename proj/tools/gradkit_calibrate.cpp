// Measures how many steps each optimizer needs on the analytic problems and
// prints a markdown table. The committed budgets in docs/calibration.md come
// from this output with headroom added.
#include <cstdio>
#include <string>
#include <vector>

#include "gradkit/bench.hpp"

namespace {

struct Setting {
    const char* variant;
    double quadratic_lr;
    double rosenbrock_lr;
};

long budget(long steps) {
    const long padded = steps + steps / 2;
    return ((padded + 49) / 50) * 50;
}

}  // namespace

int main() {
    const std::vector<Setting> settings = {
        {"sgd", 0.1, 0.001},    {"sgd_momentum", 0.05, 0.001}, {"adam", 0.01, 0.01},
        {"amsgrad", 0.01, 0.01}, {"diffgrad", 0.01, 0.01},      {"dgrad", 0.01, 0.01},
        {"cos1", 0.01, 0.01},    {"cos2", 0.01, 0.01},
    };
    const gradkit::BenchProblem quad = gradkit::make_quadratic(10);
    const gradkit::BenchProblem rosen = gradkit::make_rosenbrock();

    std::printf("| variant | problem | lr | tol | steps | budget |\n");
    std::printf("|---|---|---|---|---|---|\n");
    bool all_ok = true;
    for (const Setting& s : settings) {
        for (int which = 0; which < 2; ++which) {
            const gradkit::BenchProblem& p = which == 0 ? quad : rosen;
            const double lr = which == 0 ? s.quadratic_lr : s.rosenbrock_lr;
            const double tol = which == 0 ? 1e-6 : 1e-2;
            gradkit::OptimConfig cfg;
            cfg.variant = gradkit::variant_from_name(s.variant);
            cfg.lr = lr;
            const gradkit::BenchResult res = gradkit::bench_run(p, cfg, 20000, tol);
            if (!res.converged) all_ok = false;
            std::printf("| %s | %s | %g | %g | %ld | %ld |\n", s.variant, p.name.c_str(), lr, tol,
                        res.steps, res.converged ? budget(res.steps) : -1);
        }
    }
    return all_ok ? 0 : 1;
}
