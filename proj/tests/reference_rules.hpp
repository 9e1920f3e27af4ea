#pragma once
// Independent re-implementation of every update rule, coded directly from the
// published equations on plain std::vector state. The library must reproduce
// these trajectories to near machine precision; nothing here shares code with
// the library. The cyclic factors are written with the unreduced step index,
// so agreement also checks the library's reduced-index evaluation.

#include <cmath>
#include <cstddef>
#include <vector>

namespace refrules {

struct Hyper {
    double lr = 0.001;
    double b1 = 0.9;
    double b2 = 0.999;
    double eps = 1e-8;
    double mu = 0.9;
    long period = 30;
    double damp = 0.01;
    double floor = 9e-4;
};

struct State {
    long t = 0;
    std::vector<double> m, u, umax, prev_g, vel;

    explicit State(std::size_t n)
        : m(n, 0.0), u(n, 0.0), umax(n, 0.0), prev_g(n, 0.0), vel(n, 0.0) {}
};

inline double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double lr_factor(long t, const Hyper& h) {
    const double pi = 3.14159265358979323846;
    const double c = std::fabs(std::cos(pi * static_cast<double>(t) / static_cast<double>(h.period)));
    const double v = (2.0 - c) * std::exp(-h.damp * static_cast<double>(t % h.period + 1));
    return v < h.floor ? h.floor : v;
}

inline double lra_factor(long t, const Hyper& h) {
    const double pi = 3.14159265358979323846;
    const double c = std::fabs(std::cos(pi * static_cast<double>(t) / static_cast<double>(h.period)));
    if (c == 0.0) return h.floor;
    const double v = c * std::exp(-h.damp * static_cast<double>(t % h.period + 1));
    return v < h.floor ? h.floor : v;
}

inline void moments(State& s, const std::vector<double>& g, const Hyper& h, std::vector<double>& mhat,
                    std::vector<double>& uhat) {
    const std::size_t n = g.size();
    for (std::size_t i = 0; i < n; ++i) s.m[i] = h.b1 * s.m[i] + (1.0 - h.b1) * g[i];
    for (std::size_t i = 0; i < n; ++i) s.u[i] = h.b2 * s.u[i] + (1.0 - h.b2) * (g[i] * g[i]);
    const double c1 = 1.0 - std::pow(h.b1, static_cast<double>(s.t));
    const double c2 = 1.0 - std::pow(h.b2, static_cast<double>(s.t));
    mhat.resize(n);
    uhat.resize(n);
    for (std::size_t i = 0; i < n; ++i) mhat[i] = s.m[i] / c1;
    for (std::size_t i = 0; i < n; ++i) uhat[i] = s.u[i] / c2;
}

inline void sgd(std::vector<double>& th, const std::vector<double>& g, State& s, const Hyper& h) {
    ++s.t;
    for (std::size_t i = 0; i < th.size(); ++i) th[i] -= h.lr * g[i];
}

inline void sgd_momentum(std::vector<double>& th, const std::vector<double>& g, State& s,
                         const Hyper& h) {
    ++s.t;
    for (std::size_t i = 0; i < th.size(); ++i) {
        s.vel[i] = h.mu * s.vel[i] + g[i];
        th[i] -= h.lr * s.vel[i];
    }
}

inline void adam(std::vector<double>& th, const std::vector<double>& g, State& s, const Hyper& h) {
    ++s.t;
    std::vector<double> mhat, uhat;
    moments(s, g, h, mhat, uhat);
    for (std::size_t i = 0; i < th.size(); ++i) {
        th[i] -= h.lr * mhat[i] / std::sqrt(uhat[i] + h.eps);
    }
}

inline void amsgrad(std::vector<double>& th, const std::vector<double>& g, State& s,
                    const Hyper& h) {
    ++s.t;
    std::vector<double> mhat, uhat;
    moments(s, g, h, mhat, uhat);
    const double c2 = 1.0 - std::pow(h.b2, static_cast<double>(s.t));
    for (std::size_t i = 0; i < th.size(); ++i) {
        if (s.u[i] > s.umax[i]) s.umax[i] = s.u[i];
        th[i] -= h.lr * mhat[i] / std::sqrt(s.umax[i] / c2 + h.eps);
    }
}

inline void diffgrad(std::vector<double>& th, const std::vector<double>& g, State& s,
                     const Hyper& h) {
    ++s.t;
    std::vector<double> mhat, uhat;
    moments(s, g, h, mhat, uhat);
    for (std::size_t i = 0; i < th.size(); ++i) {
        const double xi = sig(std::fabs(s.prev_g[i] - g[i]));
        th[i] -= h.lr * xi * mhat[i] / std::sqrt(uhat[i] + h.eps);
        s.prev_g[i] = g[i];
    }
}

// Shared tail of the dgrad family: the gradient's distance from the fresh
// second moment, normalized by its largest component.
inline std::vector<double> avg_distance_hat(const State& s, const std::vector<double>& g) {
    const std::size_t n = g.size();
    std::vector<double> delta(n);
    double mx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        delta[i] = std::fabs(g[i] - s.u[i]);
        if (delta[i] > mx) mx = delta[i];
    }
    std::vector<double> hat(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) hat[i] = mx == 0.0 ? 0.0 : delta[i] / mx;
    return hat;
}

inline void dgrad(std::vector<double>& th, const std::vector<double>& g, State& s, const Hyper& h) {
    ++s.t;
    std::vector<double> mhat, uhat;
    moments(s, g, h, mhat, uhat);
    const std::vector<double> hat = avg_distance_hat(s, g);
    for (std::size_t i = 0; i < th.size(); ++i) {
        const double xi = sig(4.0 * hat[i]);
        th[i] -= h.lr * xi * mhat[i] / std::sqrt(uhat[i] + h.eps);
    }
}

inline void cos1(std::vector<double>& th, const std::vector<double>& g, State& s, const Hyper& h) {
    ++s.t;
    const double lr_t = lr_factor(s.t, h);
    std::vector<double> mhat, uhat;
    moments(s, g, h, mhat, uhat);
    const std::vector<double> hat = avg_distance_hat(s, g);
    for (std::size_t i = 0; i < th.size(); ++i) {
        const double xi = sig(4.0 * lr_t * hat[i]);
        th[i] -= h.lr * xi * mhat[i] / std::sqrt(uhat[i] + h.eps);
    }
}

inline void cos2(std::vector<double>& th, const std::vector<double>& g, State& s, const Hyper& h) {
    ++s.t;
    const double lr_t = lr_factor(s.t, h);
    const double lra_t = lra_factor(s.t, h);
    std::vector<double> mhat, uhat;
    moments(s, g, h, mhat, uhat);
    const std::vector<double> hat = avg_distance_hat(s, g);
    const double sig_a = sig(4.0 * lra_t);
    for (std::size_t i = 0; i < th.size(); ++i) {
        const double xi = sig(2.0 * lr_t * hat[i]) + sig_a - 0.5;
        th[i] -= h.lr * xi * mhat[i] / std::sqrt(uhat[i] + h.eps);
    }
}

}  // namespace refrules
