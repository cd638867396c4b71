// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <random>

#include "errors.hpp"
#include "geometry.hpp"

namespace risntn {

using Rng = std::mt19937_64;

struct ShadowFieldParams {
    double sigma_ru = 6.0; // dB
    double d_corr = 20.0;  // m
};

struct KalmanParams {
    double q_x; // dB^2
    double r_x; // dB^2
};

struct ShadowTracker {
    double estimate = 0.0; // dB
    double variance = 0.0; // dB^2

    static ShadowTracker stationary_prior(const ShadowFieldParams& p) { return {0.0, p.sigma_ru * p.sigma_ru}; }
};

/// Diagnostics of one filter step, kept for consistency checks.
struct KalmanStepInfo {
    double predicted_variance;
    double gain;
    double innovation;
};

inline double spatial_cov(UserPos2D p, UserPos2D q, const ShadowFieldParams& s) {
    return s.sigma_ru * s.sigma_ru * std::exp(-std::hypot(p.x - q.x, p.y - q.y) / s.d_corr);
}

inline double ar1_rho(double delta_s, double d_corr) {
    if (!(delta_s >= 0.0)) throw InvalidInput("ar1_rho: negative step");
    if (!(d_corr > 0.0)) throw InvalidInput("ar1_rho: correlation distance must be positive");
    return std::exp(-delta_s / d_corr);
}

/// Process-noise variance that keeps the AR(1) recursion stationary at variance sigma^2.
inline double stationary_q(double sigma, double rho) { return sigma * sigma * (1.0 - rho * rho); }

inline double evolve_shadow(double x_prev, double rho, double q_x, Rng& rng) {
    if (q_x <= 0.0) return rho * x_prev;
    std::normal_distribution<double> n(0.0, std::sqrt(q_x));
    return rho * x_prev + n(rng);
}

inline double shadow_measurement(double x_true, double r_x, Rng& rng) {
    if (r_x <= 0.0) return x_true;
    std::normal_distribution<double> n(0.0, std::sqrt(r_x));
    return x_true + n(rng);
}

inline ShadowTracker kf_step(const ShadowTracker& tr, double rho, double meas, const KalmanParams& kp,
                             KalmanStepInfo* info = nullptr) {
    const double x_pred = rho * tr.estimate;
    const double p_pred = rho * rho * tr.variance + kp.q_x;
    const double k = p_pred / (p_pred + kp.r_x);
    const double innov = meas - x_pred;
    if (info) *info = {p_pred, k, innov};
    return {x_pred + k * innov, (1.0 - k) * p_pred};
}

inline double worst_case_shadow(const ShadowTracker& tr, double nu) {
    if (!(nu >= 0.0)) throw InvalidInput("worst_case_shadow: nu must be nonnegative");
    return tr.estimate + nu * std::sqrt(tr.variance);
}

} // namespace risntn
