// Long-horizon agreement between the library and the standalone reference in
// reference_rules.hpp. The two codebases share nothing; gradients are a fixed
// random sequence, so any rule discrepancy compounds instead of washing out.
#include <cmath>
#include <vector>

#include "doctest.h"
#include "gradkit/optimizer.hpp"
#include "gradkit/rng.hpp"
#include "reference_rules.hpp"

using namespace gradkit;

namespace {

using RefStep = void (*)(std::vector<double>&, const std::vector<double>&, refrules::State&,
                         const refrules::Hyper&);

struct Pairing {
    Variant variant;
    RefStep ref;
};

const Pairing kPairings[] = {
    {Variant::sgd, refrules::sgd},
    {Variant::sgd_momentum, refrules::sgd_momentum},
    {Variant::adam, refrules::adam},
    {Variant::amsgrad, refrules::amsgrad},
    {Variant::diffgrad, refrules::diffgrad},
    {Variant::dgrad, refrules::dgrad},
    {Variant::cos1, refrules::cos1},
    {Variant::cos2, refrules::cos2},
};

void run_comparison(Variant v, RefStep ref, std::size_t dim, long horizon, std::uint64_t seed) {
    CAPTURE(variant_name(v));
    CAPTURE(dim);
    Rng rng(seed);
    std::vector<std::vector<double>> grads(horizon, std::vector<double>(dim));
    for (auto& g : grads) {
        for (double& x : g) x = rng.uniform(-5.0, 5.0);
    }

    OptimConfig cfg;
    cfg.variant = v;
    Tensor theta = Tensor::zeros({dim});
    for (std::size_t i = 0; i < dim; ++i) theta.data[i] = rng.uniform(-1.0, 1.0);
    OptimState st = OptimState::for_shape({dim});

    std::vector<double> ref_theta(theta.data.begin(), theta.data.end());
    refrules::State ref_st(dim);
    const refrules::Hyper h;

    for (long k = 0; k < horizon; ++k) {
        Tensor g = Tensor::zeros({dim});
        g.data = grads[static_cast<std::size_t>(k)];
        theta = step(theta, g, st, cfg);
        ref(ref_theta, grads[static_cast<std::size_t>(k)], ref_st, h);
        if (k < 30) {
            // within the first schedule cycle both codings round identically
            for (std::size_t i = 0; i < dim; ++i) {
                CHECK(theta.data[i] == ref_theta[i]);
            }
        }
    }
    for (std::size_t i = 0; i < dim; ++i) {
        CHECK(theta.data[i] == doctest::Approx(ref_theta[i]).epsilon(1e-12));
    }
}

}  // namespace

TEST_SUITE_BEGIN("oracle");

TEST_CASE("scalar trajectories track the reference for 1000 steps") {
    for (const Pairing& p : kPairings) {
        run_comparison(p.variant, p.ref, 1, 1000, 101);
    }
}

TEST_CASE("vector trajectories track the reference for 1000 steps") {
    for (const Pairing& p : kPairings) {
        run_comparison(p.variant, p.ref, 5, 1000, 202);
    }
}

TEST_CASE("wide tensors track the reference for a short horizon") {
    for (const Pairing& p : kPairings) {
        run_comparison(p.variant, p.ref, 64, 50, 303);
    }
}

TEST_SUITE_END();
