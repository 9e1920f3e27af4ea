#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "gradkit/optimizer.hpp"
#include "gradkit/rng.hpp"
#include "gradkit/schedule.hpp"

using namespace gradkit;

namespace {

Tensor random_tensor(Rng& rng, std::size_t n, double lo, double hi) {
    Tensor t = Tensor::zeros({n});
    for (std::size_t i = 0; i < n; ++i) t.data[i] = rng.uniform(lo, hi);
    return t;
}

const Variant kAll[] = {Variant::sgd,      Variant::sgd_momentum, Variant::adam,
                        Variant::amsgrad,  Variant::diffgrad,     Variant::dgrad,
                        Variant::cos1,     Variant::cos2};

}  // namespace

TEST_SUITE_BEGIN("optimizer");

TEST_CASE("variant names round-trip and the family split is right") {
    for (Variant v : kAll) {
        CHECK(variant_from_name(variant_name(v)) == v);
    }
    CHECK_THROWS_AS(variant_from_name("adamw"), std::invalid_argument);
    CHECK_FALSE(is_adam_family(Variant::sgd));
    CHECK_FALSE(is_adam_family(Variant::sgd_momentum));
    CHECK(is_adam_family(Variant::adam));
    CHECK(is_adam_family(Variant::cos2));
}

TEST_CASE("config validation rejects out-of-range hyperparameters") {
    OptimConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.lr = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = OptimConfig{};
    cfg.rho1 = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = OptimConfig{};
    cfg.rho2 = -0.1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = OptimConfig{};
    cfg.eps = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = OptimConfig{};
    cfg.momentum = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = OptimConfig{};
    cfg.schedule.steps = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("plain gradient descent is literal") {
    OptimConfig cfg;
    cfg.variant = Variant::sgd;
    cfg.lr = 0.25;
    OptimState st = OptimState::for_shape({3});
    const Tensor theta({1.0, -2.0, 0.5}, {3});
    const Tensor g({4.0, -4.0, 0.0}, {3});
    const Tensor next = sgd_step(theta, g, st, cfg);
    CHECK(next.data == std::vector<double>{0.0, -1.0, 0.5});
    CHECK(st.t == 1);
}

TEST_CASE("momentum accumulates velocity before scaling by the rate") {
    OptimConfig cfg;
    cfg.variant = Variant::sgd_momentum;
    cfg.lr = 0.1;
    cfg.momentum = 0.5;
    OptimState st = OptimState::for_shape({1});
    Tensor theta({0.0}, {1});
    const Tensor g({1.0}, {1});
    theta = sgd_momentum_step(theta, g, st, cfg);   // v = 1
    CHECK(theta.data[0] == doctest::Approx(-0.1).epsilon(1e-15));
    theta = sgd_momentum_step(theta, g, st, cfg);   // v = 1.5
    CHECK(theta.data[0] == doctest::Approx(-0.25).epsilon(1e-15));
    theta = sgd_momentum_step(theta, g, st, cfg);   // v = 1.75
    CHECK(theta.data[0] == doctest::Approx(-0.425).epsilon(1e-15));
}

TEST_CASE("first adam step bias-corrects a constant gradient exactly") {
    // g = 3: first moment 0.3, corrected by 1/(1 - 0.9) back to 3; second
    // moment 0.009, corrected by 1/(1 - 0.999) back to 9.
    OptimConfig cfg;
    cfg.variant = Variant::adam;
    OptimState st = OptimState::for_shape({1});
    const Tensor theta({0.0}, {1});
    const Tensor g({3.0}, {1});
    const Tensor next = adam_step(theta, g, st, cfg);
    CHECK(st.m.data[0] == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(st.u.data[0] == doctest::Approx(0.009).epsilon(1e-14));
    const double expect = -0.001 * 3.0 / std::sqrt(9.0 + 1e-8);
    CHECK(next.data[0] == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("constant gradient keeps corrected moments pinned at every step") {
    OptimConfig cfg;
    cfg.variant = Variant::adam;
    OptimState st = OptimState::for_shape({2});
    Tensor theta({0.0, 5.0}, {2});
    const Tensor g({3.0, -0.5}, {2});
    const double per_step0 = 0.001 * 3.0 / std::sqrt(9.0 + 1e-8);
    const double per_step1 = 0.001 * -0.5 / std::sqrt(0.25 + 1e-8);
    for (int k = 1; k <= 200; ++k) {
        theta = adam_step(theta, g, st, cfg);
        CHECK(theta.data[0] == doctest::Approx(-k * per_step0).epsilon(1e-12));
        CHECK(theta.data[1] == doctest::Approx(5.0 - k * per_step1).epsilon(1e-12));
    }
}

TEST_CASE("adam with eps outside the root matches that closed form") {
    OptimConfig cfg;
    cfg.variant = Variant::adam;
    cfg.eps_inside_sqrt = false;
    OptimState st = OptimState::for_shape({1});
    const Tensor theta({0.0}, {1});
    const Tensor g({3.0}, {1});
    const Tensor next = adam_step(theta, g, st, cfg);
    CHECK(next.data[0] == doctest::Approx(-0.001 * 3.0 / (3.0 + 1e-8)).epsilon(1e-13));
}

TEST_CASE("near-deterministic regime approaches sign descent") {
    OptimConfig cfg;
    cfg.variant = Variant::adam;
    OptimState st = OptimState::for_shape({2});
    const Tensor theta({0.0, 0.0}, {2});
    const Tensor g({1000.0, -250.0}, {2});
    const Tensor next = adam_step(theta, g, st, cfg);
    CHECK(next.data[0] == doctest::Approx(-cfg.lr).epsilon(1e-9));
    CHECK(next.data[1] == doctest::Approx(cfg.lr).epsilon(1e-9));
}

TEST_CASE("first amsgrad step is bitwise identical to adam") {
    OptimConfig adam_cfg;
    adam_cfg.variant = Variant::adam;
    OptimConfig ams_cfg;
    ams_cfg.variant = Variant::amsgrad;
    Rng rng(7);
    const Tensor theta = random_tensor(rng, 9, -1.0, 1.0);
    const Tensor g = random_tensor(rng, 9, -5.0, 5.0);
    OptimState sa = OptimState::for_shape({9});
    OptimState sb = OptimState::for_shape({9});
    const Tensor a = adam_step(theta, g, sa, adam_cfg);
    const Tensor b = amsgrad_step(theta, g, sb, ams_cfg);
    CHECK(a.data == b.data);
}

TEST_CASE("amsgrad running max never decreases and dominates the accumulator") {
    OptimConfig cfg;
    cfg.variant = Variant::amsgrad;
    Rng rng(11);
    Tensor theta = random_tensor(rng, 6, -1.0, 1.0);
    OptimState st = OptimState::for_shape({6});
    std::vector<double> prev_bar(6, 0.0);
    for (int k = 0; k < 100; ++k) {
        // decaying gradients force the accumulator itself to shrink later on
        const double amp = k < 20 ? 5.0 : 0.05;
        const Tensor g = random_tensor(rng, 6, -amp, amp);
        theta = amsgrad_step(theta, g, st, cfg);
        for (std::size_t i = 0; i < 6; ++i) {
            CHECK(st.u_bar.data[i] >= prev_bar[i]);
            CHECK(st.u_bar.data[i] >= st.u.data[i]);
            prev_bar[i] = st.u_bar.data[i];
        }
    }
    // by now the max must strictly exceed the decayed accumulator somewhere
    bool strictly = false;
    for (std::size_t i = 0; i < 6; ++i) strictly |= st.u_bar.data[i] > st.u.data[i];
    CHECK(strictly);
}

TEST_CASE("sign gate: first step squashes with the full gradient magnitude") {
    OptimConfig cfg;
    cfg.variant = Variant::diffgrad;
    OptimState st = OptimState::for_shape({1});
    const Tensor theta({0.0}, {1});
    const Tensor g({2.0}, {1});
    StepTrace tr;
    diffgrad_step(theta, g, st, cfg, &tr);
    // previous gradient starts at zero, so the gate sees |0 - 2| = 2
    CHECK(tr.xi_max == sigmoid(2.0));
    CHECK(tr.xi_min == sigmoid(2.0));
    CHECK(st.g_prev.data[0] == 2.0);
}

TEST_CASE("repeating the same gradient drops the sign gate to one half") {
    OptimConfig cfg;
    cfg.variant = Variant::diffgrad;
    OptimState st = OptimState::for_shape({3});
    Tensor theta({0.0, 0.0, 0.0}, {3});
    const Tensor g({2.0, -1.0, 0.25}, {3});
    theta = diffgrad_step(theta, g, st, cfg);
    StepTrace tr;
    diffgrad_step(theta, g, st, cfg, &tr);
    CHECK(tr.xi_min == 0.5);
    CHECK(tr.xi_max == 0.5);
}

TEST_CASE("normalized-distance gate hits its cap on the extremal component") {
    OptimConfig cfg;
    cfg.variant = Variant::dgrad;
    OptimState st = OptimState::for_shape({4});
    const Tensor theta({0.0, 0.0, 0.0, 0.0}, {4});
    const Tensor g({3.0, -1.0, 0.5, 0.0}, {4});
    StepTrace tr;
    dgrad_step(theta, g, st, cfg, &tr);
    // the largest |g - u| component normalizes to exactly 1
    CHECK(tr.xi_max == sigmoid(4.0));
    CHECK(tr.xi_min >= 0.5);
}

TEST_CASE("gate ranges hold along random trajectories") {
    const double cap_dgrad = sigmoid(4.0);
    const double cap_cos1 = sigmoid(8.0);
    const double cap_cos2 = 2.0 * sigmoid(4.0) - 0.5;
    for (Variant v : {Variant::diffgrad, Variant::dgrad, Variant::cos1, Variant::cos2}) {
        OptimConfig cfg;
        cfg.variant = v;
        Rng rng(1234);
        Tensor theta = random_tensor(rng, 7, -1.0, 1.0);
        OptimState st = OptimState::for_shape({7});
        for (int k = 0; k < 200; ++k) {
            const Tensor g = random_tensor(rng, 7, -5.0, 5.0);
            StepTrace tr;
            theta = step(theta, g, st, cfg, &tr);
            CHECK(tr.xi_min >= 0.5);
            switch (v) {
                case Variant::diffgrad: CHECK(tr.xi_max < 1.0); break;
                case Variant::dgrad: CHECK(tr.xi_max <= cap_dgrad); break;
                case Variant::cos1: CHECK(tr.xi_max < cap_cos1); break;
                case Variant::cos2:
                    CHECK(tr.xi_min > 0.5);
                    CHECK(tr.xi_max <= cap_cos2);
                    break;
                default: break;
            }
        }
    }
}

TEST_CASE("first update magnitude never exceeds the learning rate") {
    // One fresh step with any gradient moves each coordinate by at most lr
    // (the squashed variants stay below it; the additive gate allows 2s(4)-1/2).
    Rng rng(99);
    for (Variant v : {Variant::adam, Variant::amsgrad, Variant::diffgrad, Variant::dgrad,
                      Variant::cos1, Variant::cos2}) {
        OptimConfig cfg;
        cfg.variant = v;
        for (int rep = 0; rep < 50; ++rep) {
            const Tensor theta = random_tensor(rng, 11, -2.0, 2.0);
            const Tensor g = random_tensor(rng, 11, -5.0, 5.0);
            OptimState st = OptimState::for_shape({11});
            const Tensor next = step(theta, g, st, cfg);
            double worst = 0.0;
            for (std::size_t i = 0; i < 11; ++i) {
                worst = std::max(worst, std::fabs(next.data[i] - theta.data[i]));
            }
            const double cap = v == Variant::cos2 ? (2.0 * sigmoid(4.0) - 0.5) * cfg.lr : cfg.lr;
            CHECK(worst <= cap);
        }
    }
}

TEST_CASE("a zero gradient from a fresh state moves nothing") {
    for (Variant v : kAll) {
        OptimConfig cfg;
        cfg.variant = v;
        OptimState st = OptimState::for_shape({5});
        const Tensor theta({1.0, -1.0, 2.0, -2.0, 0.0}, {5});
        const Tensor zero = Tensor::zeros({5});
        const Tensor next = step(theta, zero, st, cfg);
        CHECK(next.data == theta.data);
    }
}

TEST_CASE("cyclic variants read the schedule on the post-increment clock") {
    OptimConfig cfg;
    cfg.variant = Variant::cos1;
    OptimState st = OptimState::for_shape({2});
    Tensor theta({0.0, 0.0}, {2});
    Rng rng(5);
    for (long k = 1; k <= 35; ++k) {
        const Tensor g = random_tensor(rng, 2, -1.0, 1.0);
        StepTrace tr;
        theta = cos1_step(theta, g, st, cfg, &tr);
        CHECK(tr.t == k);
        CHECK(tr.lr_factor == cyclic_lr(k, cfg.schedule));
    }
}

TEST_CASE("distance gate can be re-anchored on the first moment") {
    OptimConfig cfg;
    cfg.variant = Variant::dgrad;
    cfg.dgrad_avg_uses_m = true;
    OptimState st = OptimState::for_shape({2});
    const Tensor theta({0.0, 0.0}, {2});
    const Tensor g({2.0, 1.0}, {2});
    StepTrace tr;
    dgrad_step(theta, g, st, cfg, &tr);
    // distances |g - m| are 0.9*|g|, so both gates normalize as in the raw
    // gradient case: the larger one saturates to s(4), the other to s(2)
    CHECK(tr.xi_max == sigmoid(4.0));
    CHECK(tr.xi_min == doctest::Approx(sigmoid(4.0 * 0.5)).epsilon(1e-12));
}

TEST_CASE("shape and finiteness violations are rejected with typed errors") {
    OptimConfig cfg;
    cfg.variant = Variant::adam;
    OptimState st = OptimState::for_shape({2});
    const Tensor theta({0.0, 0.0}, {2});
    CHECK_THROWS_AS(adam_step(theta, Tensor({1.0}, {1}), st, cfg), std::invalid_argument);
    Tensor bad({1.0, std::numeric_limits<double>::quiet_NaN()}, {2});
    CHECK_THROWS_AS(adam_step(theta, bad, st, cfg), std::runtime_error);
    OptimState wrong = OptimState::for_shape({3});
    CHECK_THROWS_AS(adam_step(theta, Tensor({1.0, 1.0}, {2}), wrong, cfg),
                    std::invalid_argument);
}

TEST_CASE("dispatcher agrees with the direct entry points") {
    Rng rng(42);
    for (Variant v : kAll) {
        OptimConfig cfg;
        cfg.variant = v;
        const Tensor theta = random_tensor(rng, 4, -1.0, 1.0);
        const Tensor g = random_tensor(rng, 4, -3.0, 3.0);
        OptimState sa = OptimState::for_shape({4});
        OptimState sb = OptimState::for_shape({4});
        Tensor direct;
        switch (v) {
            case Variant::sgd: direct = sgd_step(theta, g, sa, cfg); break;
            case Variant::sgd_momentum: direct = sgd_momentum_step(theta, g, sa, cfg); break;
            case Variant::adam: direct = adam_step(theta, g, sa, cfg); break;
            case Variant::amsgrad: direct = amsgrad_step(theta, g, sa, cfg); break;
            case Variant::diffgrad: direct = diffgrad_step(theta, g, sa, cfg); break;
            case Variant::dgrad: direct = dgrad_step(theta, g, sa, cfg); break;
            case Variant::cos1: direct = cos1_step(theta, g, sa, cfg); break;
            case Variant::cos2: direct = cos2_step(theta, g, sa, cfg); break;
        }
        const Tensor dispatched = step(theta, g, sb, cfg);
        CHECK(direct.data == dispatched.data);
    }
}

TEST_CASE("the wrapper advances every tensor and reports indexed failures") {
    OptimConfig cfg;
    cfg.variant = Variant::adam;
    std::vector<Tensor> params = {Tensor({1.0, 2.0}, {2}), Tensor({3.0}, {1})};
    Optimizer opt(cfg, params);
    std::vector<Tensor> grads = {Tensor({0.5, -0.5}, {2}), Tensor({1.0}, {1})};
    std::vector<StepTrace> traces;
    opt.step_all(params, grads, &traces);
    CHECK(opt.step_count() == 1);
    CHECK(traces.size() == 2);
    CHECK(params[0].data[0] < 1.0);
    CHECK(params[1].data[0] < 3.0);

    grads[1] = Tensor({1.0, 1.0}, {2});
    CHECK_THROWS_WITH_AS(opt.step_all(params, grads), doctest::Contains("tensor 1"),
                         std::invalid_argument);
    std::vector<Tensor> short_grads = {grads[0]};
    CHECK_THROWS_AS(opt.step_all(params, short_grads), std::invalid_argument);
}

TEST_CASE("wrapper constructor validates the config") {
    OptimConfig cfg;
    cfg.lr = -1.0;
    CHECK_THROWS_AS(Optimizer(cfg, {Tensor({0.0}, {1})}), std::invalid_argument);
}

TEST_SUITE_END();
