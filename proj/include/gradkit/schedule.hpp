#pragma once

namespace gradkit {

/// Parameters of the cyclic learning-rate factors.
struct ScheduleConfig {
    long steps = 30;          // cycle period in optimizer iterations
    double decay = 0.01;      // exponential damping constant
    double zero_floor = 9e-4; // substituted wherever a factor would vanish

    void validate() const;
};

/// Logistic sigmoid 1 / (1 + e^-x).
double sigmoid(double x);

/// Cyclic multiplicative factor: (2 - |cos(pi*t/steps)|) * e^(-decay*(mod(t,steps)+1)),
/// floored at zero_floor. t counts optimizer iterations starting at 1.
/// Depends on t only through mod(t, steps), so the value is exactly periodic.
double cyclic_lr(long t, const ScheduleConfig& cfg);

/// Cyclic additive factor: |cos(pi*t/steps)| * e^(-decay*(mod(t,steps)+1)),
/// with vanishing cosine (and anything below zero_floor) replaced by zero_floor.
double cyclic_lra(long t, const ScheduleConfig& cfg);

}  // namespace gradkit
