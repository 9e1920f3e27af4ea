#include "gradkit/optimizer.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace gradkit {

namespace {

const char* kVariantNames[kVariantCount] = {
    "sgd", "sgd_momentum", "adam", "amsgrad", "diffgrad", "dgrad", "cos1", "cos2",
};

void check_inputs(const Tensor& theta, const Tensor& g, const OptimState& state) {
    if (!theta.same_shape(g)) {
        throw std::invalid_argument("gradient shape " + shape_str(g.shape) +
                                    " does not match parameter shape " + shape_str(theta.shape));
    }
    if (!theta.same_shape(state.m)) {
        throw std::invalid_argument("optimizer state was built for shape " + shape_str(state.m.shape) +
                                    ", parameters have shape " + shape_str(theta.shape));
    }
    const std::size_t bad = first_nonfinite(g);
    if (bad != g.size()) {
        throw std::runtime_error("non-finite gradient component at flat index " + std::to_string(bad));
    }
}

void check_output(const Tensor& next) {
    const std::size_t bad = first_nonfinite(next);
    if (bad != next.size()) {
        throw std::runtime_error("step produced a non-finite parameter at flat index " +
                                 std::to_string(bad));
    }
}

inline double denom(double u_hat, const OptimConfig& cfg) {
    return cfg.eps_inside_sqrt ? std::sqrt(u_hat + cfg.eps) : std::sqrt(u_hat) + cfg.eps;
}

void fill_trace(StepTrace* trace, long t, double sum_abs, std::size_t n, double xi_min,
                double xi_max, double lr_factor) {
    if (trace == nullptr) return;
    trace->t = t;
    trace->mean_abs_update = sum_abs / static_cast<double>(n);
    trace->xi_min = xi_min;
    trace->xi_max = xi_max;
    trace->lr_factor = lr_factor;
}

/// Shared core of dgrad/cos1/cos2: normalized distance between the gradient
/// and its running average, squashed by a variant-specific gate.
template <typename XiFn>
Tensor gated_step(const Tensor& theta, const Tensor& g, OptimState& state, const OptimConfig& cfg,
                  StepTrace* trace, double lr_factor, XiFn&& xi_of) {
    check_inputs(theta, g, state);
    ++state.t;
    const Moments mo = adam_moments(state, g, cfg);

    const Tensor& avg = cfg.dgrad_avg_uses_m ? state.m : state.u;
    const std::size_t n = theta.size();
    std::vector<double> delta(n);
    double mx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::fabs(g.data[i] - avg.data[i]);
        delta[i] = d;
        if (d > mx) mx = d;
    }

    Tensor out = theta;
    double sum_abs = 0.0;
    double xi_min = std::numeric_limits<double>::infinity();
    double xi_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        // mx == 0 means the whole tensor sits on its running average; the
        // normalized distance is defined as zero there, not 0/0.
        const double hat = (mx == 0.0) ? 0.0 : delta[i] / mx;
        const double xi = xi_of(hat);
        if (xi < xi_min) xi_min = xi;
        if (xi > xi_max) xi_max = xi;
        const double upd = cfg.lr * xi * mo.m_hat.data[i] / denom(mo.u_hat.data[i], cfg);
        out.data[i] = theta.data[i] - upd;
        sum_abs += std::fabs(upd);
    }
    check_output(out);
    fill_trace(trace, state.t, sum_abs, n, xi_min, xi_max, lr_factor);
    return out;
}

}  // namespace

std::string_view variant_name(Variant v) {
    return kVariantNames[static_cast<int>(v)];
}

Variant variant_from_name(std::string_view name) {
    for (int i = 0; i < kVariantCount; ++i) {
        if (name == kVariantNames[i]) return static_cast<Variant>(i);
    }
    std::string msg = "unknown optimizer variant \"";
    msg.append(name);
    msg += "\"; expected one of:";
    for (int i = 0; i < kVariantCount; ++i) {
        msg += ' ';
        msg += kVariantNames[i];
    }
    throw std::invalid_argument(msg);
}

bool is_adam_family(Variant v) {
    return v != Variant::sgd && v != Variant::sgd_momentum;
}

void OptimConfig::validate() const {
    if (!std::isfinite(lr) || lr <= 0.0) {
        throw std::invalid_argument("learning rate must be positive and finite, got " +
                                    std::to_string(lr));
    }
    if (!(rho1 >= 0.0 && rho1 < 1.0)) {
        throw std::invalid_argument("rho1 must lie in [0, 1), got " + std::to_string(rho1));
    }
    if (!(rho2 >= 0.0 && rho2 < 1.0)) {
        throw std::invalid_argument("rho2 must lie in [0, 1), got " + std::to_string(rho2));
    }
    if (!std::isfinite(eps) || eps <= 0.0) {
        throw std::invalid_argument("eps must be positive and finite, got " + std::to_string(eps));
    }
    if (!(momentum >= 0.0 && momentum < 1.0)) {
        throw std::invalid_argument("momentum must lie in [0, 1), got " + std::to_string(momentum));
    }
    schedule.validate();
}

OptimState OptimState::for_shape(const std::vector<std::size_t>& shape) {
    OptimState s;
    s.m = Tensor::zeros(shape);
    s.u = Tensor::zeros(shape);
    s.u_bar = Tensor::zeros(shape);
    s.g_prev = Tensor::zeros(shape);
    s.velocity = Tensor::zeros(shape);
    return s;
}

Moments adam_moments(OptimState& state, const Tensor& g, const OptimConfig& cfg) {
    if (state.t < 1) {
        throw std::logic_error("adam_moments requires an advanced step counter (t >= 1)");
    }
    if (!state.m.same_shape(g)) {
        throw std::invalid_argument("gradient shape " + shape_str(g.shape) +
                                    " does not match moment shape " + shape_str(state.m.shape));
    }
    const double a1 = 1.0 - cfg.rho1;
    const double a2 = 1.0 - cfg.rho2;
    const double c1 = 1.0 - std::pow(cfg.rho1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(cfg.rho2, static_cast<double>(state.t));
    Moments out{Tensor::zeros(state.m.shape), Tensor::zeros(state.m.shape)};
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double gi = g.data[i];
        state.m.data[i] = cfg.rho1 * state.m.data[i] + a1 * gi;
        state.u.data[i] = cfg.rho2 * state.u.data[i] + a2 * (gi * gi);
        out.m_hat.data[i] = state.m.data[i] / c1;
        out.u_hat.data[i] = state.u.data[i] / c2;
    }
    return out;
}

Tensor sgd_step(const Tensor& theta, const Tensor& g, OptimState& state, const OptimConfig& cfg,
                StepTrace* trace) {
    check_inputs(theta, g, state);
    ++state.t;
    Tensor out = theta;
    double sum_abs = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double upd = cfg.lr * g.data[i];
        out.data[i] = theta.data[i] - upd;
        sum_abs += std::fabs(upd);
    }
    check_output(out);
    fill_trace(trace, state.t, sum_abs, g.size(), 1.0, 1.0, 1.0);
    return out;
}

Tensor sgd_momentum_step(const Tensor& theta, const Tensor& g, OptimState& state,
                         const OptimConfig& cfg, StepTrace* trace) {
    check_inputs(theta, g, state);
    ++state.t;
    Tensor out = theta;
    double sum_abs = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        state.velocity.data[i] = cfg.momentum * state.velocity.data[i] + g.data[i];
        const double upd = cfg.lr * state.velocity.data[i];
        out.data[i] = theta.data[i] - upd;
        sum_abs += std::fabs(upd);
    }
    check_output(out);
    fill_trace(trace, state.t, sum_abs, g.size(), 1.0, 1.0, 1.0);
    return out;
}

Tensor adam_step(const Tensor& theta, const Tensor& g, OptimState& state, const OptimConfig& cfg,
                 StepTrace* trace) {
    check_inputs(theta, g, state);
    ++state.t;
    const Moments mo = adam_moments(state, g, cfg);
    Tensor out = theta;
    double sum_abs = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double upd = cfg.lr * mo.m_hat.data[i] / denom(mo.u_hat.data[i], cfg);
        out.data[i] = theta.data[i] - upd;
        sum_abs += std::fabs(upd);
    }
    check_output(out);
    fill_trace(trace, state.t, sum_abs, g.size(), 1.0, 1.0, 1.0);
    return out;
}

Tensor amsgrad_step(const Tensor& theta, const Tensor& g, OptimState& state, const OptimConfig& cfg,
                    StepTrace* trace) {
    check_inputs(theta, g, state);
    ++state.t;
    const Moments mo = adam_moments(state, g, cfg);
    // The running max tracks the raw accumulator, which keeps it
    // componentwise non-decreasing; bias correction is applied at use so the
    // first step still matches plain Adam.
    const double c2 = 1.0 - std::pow(cfg.rho2, static_cast<double>(state.t));
    Tensor out = theta;
    double sum_abs = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (state.u.data[i] > state.u_bar.data[i]) state.u_bar.data[i] = state.u.data[i];
        const double u_hat = state.u_bar.data[i] / c2;
        const double upd = cfg.lr * mo.m_hat.data[i] / denom(u_hat, cfg);
        out.data[i] = theta.data[i] - upd;
        sum_abs += std::fabs(upd);
    }
    check_output(out);
    fill_trace(trace, state.t, sum_abs, g.size(), 1.0, 1.0, 1.0);
    return out;
}

Tensor diffgrad_step(const Tensor& theta, const Tensor& g, OptimState& state,
                     const OptimConfig& cfg, StepTrace* trace) {
    check_inputs(theta, g, state);
    ++state.t;
    const Moments mo = adam_moments(state, g, cfg);
    Tensor out = theta;
    double sum_abs = 0.0;
    double xi_min = std::numeric_limits<double>::infinity();
    double xi_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double xi = sigmoid(std::fabs(state.g_prev.data[i] - g.data[i]));
        if (xi < xi_min) xi_min = xi;
        if (xi > xi_max) xi_max = xi;
        const double upd = cfg.lr * xi * mo.m_hat.data[i] / denom(mo.u_hat.data[i], cfg);
        out.data[i] = theta.data[i] - upd;
        sum_abs += std::fabs(upd);
        state.g_prev.data[i] = g.data[i];
    }
    check_output(out);
    fill_trace(trace, state.t, sum_abs, g.size(), xi_min, xi_max, 1.0);
    return out;
}

Tensor dgrad_step(const Tensor& theta, const Tensor& g, OptimState& state, const OptimConfig& cfg,
                  StepTrace* trace) {
    return gated_step(theta, g, state, cfg, trace, 1.0,
                      [](double hat) { return sigmoid(4.0 * hat); });
}

Tensor cos1_step(const Tensor& theta, const Tensor& g, OptimState& state, const OptimConfig& cfg,
                 StepTrace* trace) {
    const double lr_t = cyclic_lr(state.t + 1, cfg.schedule);
    return gated_step(theta, g, state, cfg, trace, lr_t,
                      [lr_t](double hat) { return sigmoid(4.0 * lr_t * hat); });
}

Tensor cos2_step(const Tensor& theta, const Tensor& g, OptimState& state, const OptimConfig& cfg,
                 StepTrace* trace) {
    const double lr_t = cyclic_lr(state.t + 1, cfg.schedule);
    const double lra_t = cyclic_lra(state.t + 1, cfg.schedule);
    const double sig_a = sigmoid(4.0 * lra_t);
    return gated_step(theta, g, state, cfg, trace, lr_t, [lr_t, sig_a](double hat) {
        return sigmoid(2.0 * lr_t * hat) + sig_a - 0.5;
    });
}

Tensor step(const Tensor& theta, const Tensor& g, OptimState& state, const OptimConfig& cfg,
            StepTrace* trace) {
    switch (cfg.variant) {
        case Variant::sgd: return sgd_step(theta, g, state, cfg, trace);
        case Variant::sgd_momentum: return sgd_momentum_step(theta, g, state, cfg, trace);
        case Variant::adam: return adam_step(theta, g, state, cfg, trace);
        case Variant::amsgrad: return amsgrad_step(theta, g, state, cfg, trace);
        case Variant::diffgrad: return diffgrad_step(theta, g, state, cfg, trace);
        case Variant::dgrad: return dgrad_step(theta, g, state, cfg, trace);
        case Variant::cos1: return cos1_step(theta, g, state, cfg, trace);
        case Variant::cos2: return cos2_step(theta, g, state, cfg, trace);
    }
    throw std::logic_error("unhandled optimizer variant");
}

Optimizer::Optimizer(OptimConfig cfg, const std::vector<Tensor>& params) : cfg_(std::move(cfg)) {
    cfg_.validate();
    states_.reserve(params.size());
    for (const Tensor& p : params) {
        states_.push_back(OptimState::for_shape(p.shape));
    }
}

void Optimizer::step_all(std::vector<Tensor>& params, const std::vector<Tensor>& grads,
                         std::vector<StepTrace>* traces) {
    if (params.size() != states_.size()) {
        throw std::invalid_argument("optimizer holds state for " + std::to_string(states_.size()) +
                                    " tensors, got " + std::to_string(params.size()));
    }
    if (grads.size() != params.size()) {
        throw std::invalid_argument("got " + std::to_string(grads.size()) + " gradients for " +
                                    std::to_string(params.size()) + " parameter tensors");
    }
    if (traces != nullptr) traces->assign(params.size(), StepTrace{});
    for (std::size_t i = 0; i < params.size(); ++i) {
        StepTrace* tr = traces ? &(*traces)[i] : nullptr;
        try {
            params[i] = step(params[i], grads[i], states_[i], cfg_, tr);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("parameter tensor " + std::to_string(i) + ": " + e.what());
        } catch (const std::runtime_error& e) {
            throw std::runtime_error("parameter tensor " + std::to_string(i) + ": " + e.what());
        }
    }
}

}  // namespace gradkit
