#include "gradkit/schedule.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gradkit {

void ScheduleConfig::validate() const {
    if (steps < 1) throw std::invalid_argument("schedule: steps must be >= 1");
    if (!(decay > 0.0)) throw std::invalid_argument("schedule: decay must be > 0");
    if (!(zero_floor > 0.0)) throw std::invalid_argument("schedule: zero_floor must be > 0");
}

double sigmoid(double x) {
    return 1.0 / (1.0 + std::exp(-x));
}

namespace {

// |cos(pi*t/steps)| has period `steps` in t; evaluating on the reduced index
// keeps the value bit-identical across cycles.
inline double cos_mag(long reduced, long steps) {
    return std::fabs(std::cos(std::numbers::pi * static_cast<double>(reduced) /
                              static_cast<double>(steps)));
}

}  // namespace

double cyclic_lr(long t, const ScheduleConfig& cfg) {
    const long r = t % cfg.steps;
    const double c = cos_mag(r, cfg.steps);
    const double v = (2.0 - c) * std::exp(-cfg.decay * static_cast<double>(r + 1));
    return v < cfg.zero_floor ? cfg.zero_floor : v;
}

double cyclic_lra(long t, const ScheduleConfig& cfg) {
    const long r = t % cfg.steps;
    const double c = cos_mag(r, cfg.steps);
    if (c == 0.0) return cfg.zero_floor;
    const double v = c * std::exp(-cfg.decay * static_cast<double>(r + 1));
    return v < cfg.zero_floor ? cfg.zero_floor : v;
}

}  // namespace gradkit
