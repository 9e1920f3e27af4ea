#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gradkit/schedule.hpp"
#include "gradkit/tensor.hpp"

namespace gradkit {

enum class Variant {
    sgd,
    sgd_momentum,
    adam,
    amsgrad,
    diffgrad,
    dgrad,
    cos1,
    cos2,
};

constexpr int kVariantCount = 8;

std::string_view variant_name(Variant v);
Variant variant_from_name(std::string_view name);
bool is_adam_family(Variant v);

struct OptimConfig {
    Variant variant = Variant::adam;
    double lr = 0.001;        // global learning rate
    double rho1 = 0.9;        // gradient decay factor
    double rho2 = 0.999;      // squared gradient decay factor
    double eps = 1e-8;
    double momentum = 0.9;    // sgd_momentum only
    // Denominator form: sqrt(u_hat + eps) when true, sqrt(u_hat) + eps when
    // false. The default follows the update rule implemented here; the switch
    // exists for cross-checking against codebases that add eps outside.
    bool eps_inside_sqrt = true;
    // Alternative reading of the gradient-average term in the d-variants:
    // measure the gradient's distance from the first moment m instead of the
    // second moment u. Off by default.
    bool dgrad_avg_uses_m = false;
    ScheduleConfig schedule;

    void validate() const;
};

/// Per-parameter-tensor optimizer state. All buffers share the parameter's
/// shape and start at zero; t counts completed updates and is incremented at
/// the start of each step, so the first update runs with t = 1.
struct OptimState {
    long t = 0;
    Tensor m;        // first moment
    Tensor u;        // second moment
    Tensor u_bar;    // running max of u; componentwise non-decreasing
    Tensor g_prev;   // previous raw gradient (diffgrad)
    Tensor velocity; // momentum buffer (sgd_momentum)

    static OptimState for_shape(const std::vector<std::size_t>& shape);
};

/// Per-step scalars recorded when tracing is enabled.
struct StepTrace {
    long t = 0;
    double mean_abs_update = 0.0;
    double xi_min = 1.0;
    double xi_max = 1.0;
    double lr_factor = 1.0;
};

/// Bias-corrected moments after folding in the current gradient.
/// Requires state.t >= 1 (the caller has already advanced the step counter).
struct Moments {
    Tensor m_hat;
    Tensor u_hat;
};
Moments adam_moments(OptimState& state, const Tensor& g, const OptimConfig& cfg);

// Step rules. Each takes the current parameter tensor and gradient, mutates
// the state (including advancing t), and returns the updated parameters.
// All throw std::invalid_argument on shape mismatch and std::runtime_error
// when the gradient or the produced update is not finite.
Tensor sgd_step(const Tensor& theta, const Tensor& g, OptimState& state, const OptimConfig& cfg,
                StepTrace* trace = nullptr);
Tensor sgd_momentum_step(const Tensor& theta, const Tensor& g, OptimState& state,
                         const OptimConfig& cfg, StepTrace* trace = nullptr);
Tensor adam_step(const Tensor& theta, const Tensor& g, OptimState& state, const OptimConfig& cfg,
                 StepTrace* trace = nullptr);
Tensor amsgrad_step(const Tensor& theta, const Tensor& g, OptimState& state, const OptimConfig& cfg,
                    StepTrace* trace = nullptr);
Tensor diffgrad_step(const Tensor& theta, const Tensor& g, OptimState& state, const OptimConfig& cfg,
                     StepTrace* trace = nullptr);
Tensor dgrad_step(const Tensor& theta, const Tensor& g, OptimState& state, const OptimConfig& cfg,
                  StepTrace* trace = nullptr);
Tensor cos1_step(const Tensor& theta, const Tensor& g, OptimState& state, const OptimConfig& cfg,
                 StepTrace* trace = nullptr);
Tensor cos2_step(const Tensor& theta, const Tensor& g, OptimState& state, const OptimConfig& cfg,
                 StepTrace* trace = nullptr);

/// Dispatch on cfg.variant.
Tensor step(const Tensor& theta, const Tensor& g, OptimState& state, const OptimConfig& cfg,
            StepTrace* trace = nullptr);

/// Convenience wrapper holding one OptimState per parameter tensor.
class Optimizer {
public:
    Optimizer(OptimConfig cfg, const std::vector<Tensor>& params);

    /// Updates every parameter in place. Errors are rethrown with the
    /// offending tensor's index in the message.
    void step_all(std::vector<Tensor>& params, const std::vector<Tensor>& grads,
                  std::vector<StepTrace>* traces = nullptr);

    const OptimConfig& config() const { return cfg_; }
    std::vector<OptimState>& states() { return states_; }
    const std::vector<OptimState>& states() const { return states_; }
    long step_count() const { return states_.empty() ? 0 : states_.front().t; }

private:
    OptimConfig cfg_;
    std::vector<OptimState> states_;
};

}  // namespace gradkit
