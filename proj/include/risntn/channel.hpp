// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"

namespace risntn {

using cplx = std::complex<double>;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

struct LinkBudget {
    double tx_power;     // W
    double noise_power;  // W
    double carrier_freq; // Hz
    double bandwidth;    // Hz
    double c = kSpeedOfLight;

    double wavelength() const { return c / carrier_freq; }
    double snr_scale() const { return tx_power / noise_power; }
};

struct LargeScaleParams {
    double atm_su_db = 1.0;
    double atm_sr_db = 0.8;
    double excess_su_db = 0.0;
    double excess_sr_db = 0.0;
    double shadow_ru_db = 0.0;
    double blockage = 1.0;
};

/// Uniform planar array, row-major element order, centred on the RIS reference point.
struct RISSpec {
    std::size_t n_elements = 1;
    std::size_t rows = 1;
    std::size_t cols = 1;
    double element_spacing = 0.5; // in wavelengths
    Vec3 normal{0.0, 1.0, 0.0};
    Vec3 axis_u{1.0, 0.0, 0.0}; // along columns
    Vec3 axis_v{0.0, 0.0, 1.0}; // along rows

    /// Squarest rows x cols factorisation of n with rows <= cols.
    static RISSpec square(std::size_t n, double spacing = 0.5) {
        if (n == 0) throw InvalidInput("RIS needs at least one element");
        std::size_t r = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
        while (r > 1 && n % r != 0) --r;
        RISSpec s;
        s.n_elements = n;
        s.rows = r;
        s.cols = n / r;
        s.element_spacing = spacing;
        return s;
    }

    void validate() const {
        if (n_elements < 1 || rows * cols != n_elements)
            throw InvalidInput("RIS rows*cols must equal n_elements >= 1");
        if (!(element_spacing > 0.0)) throw InvalidInput("RIS element spacing must be positive");
        const double tol = 1e-9;
        auto unitish = [&](Vec3 a) { return std::abs(norm(a) - 1.0) < tol; };
        if (!unitish(normal) || !unitish(axis_u) || !unitish(axis_v) ||
            std::abs(dot(normal, axis_u)) > tol || std::abs(dot(normal, axis_v)) > tol ||
            std::abs(dot(axis_u, axis_v)) > tol)
            throw InvalidInput("RIS orientation must be orthonormal");
    }
};

struct RISConfig {
    std::vector<double> phases;
};

struct ChannelRealization {
    cplx h_d;
    cplx h_r;
    double beta_su, beta_sr, beta_ru;
};

inline double fspl_db(double d, double fc, double c = kSpeedOfLight) {
    if (!(d > 0.0) || !(fc > 0.0)) throw InvalidInput("fspl_db: distance and frequency must be positive");
    return 20.0 * std::log10(4.0 * kPi * fc * d / c);
}

/// Converts an EIRP density and receiver noise figure into linear transmit and noise power.
inline LinkBudget link_budget(double eirp_density_dbw_per_mhz, double bandwidth_hz, double noise_figure_db,
                              double carrier_freq_hz = 2.2e9) {
    if (!(bandwidth_hz > 0.0)) throw InvalidInput("link_budget: bandwidth must be positive");
    if (!(carrier_freq_hz > 0.0)) throw InvalidInput("link_budget: carrier frequency must be positive");
    const double tx_dbw = eirp_density_dbw_per_mhz + 10.0 * std::log10(bandwidth_hz / 1e6);
    const double noise_dbw = -204.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
    return {db_to_linear(tx_dbw), db_to_linear(noise_dbw), carrier_freq_hz, bandwidth_hz};
}

inline double direct_gain(const ScenarioGeometry& g, const LinkBudget& b, const LargeScaleParams& p) {
    if (!(p.blockage > 0.0 && p.blockage <= 1.0)) throw InvalidInput("blockage factor must lie in (0,1]");
    const double loss = fspl_db(distances(g).d_su, b.carrier_freq, b.c) + p.atm_su_db + p.excess_su_db;
    return p.blockage * db_to_linear(-loss);
}

inline double sr_gain(const ScenarioGeometry& g, const LinkBudget& b, const LargeScaleParams& p) {
    const double loss = fspl_db(distances(g).d_sr, b.carrier_freq, b.c) + p.atm_sr_db + p.excess_sr_db;
    return db_to_linear(-loss);
}

inline double ru_gain(const ScenarioGeometry& g, const LinkBudget& b, double shadow_ru_db) {
    return db_to_linear(-(fspl_db(distances(g).d_ru, b.carrier_freq, b.c) + shadow_ru_db));
}

/// Unit-modulus carrier phasor exp(-j 2 pi d / lambda), reduced modulo one wavelength first.
inline cplx path_phasor(double distance, double wavelength) {
    const double cycles = std::fmod(distance / wavelength, 1.0);
    return std::polar(1.0, -2.0 * kPi * cycles);
}

/// a[n] = exp(j 2 pi r_n . dir / lambda). The planar grid factorises into row and column terms.
inline std::vector<cplx> array_response(const RISSpec& spec, Vec3 unit_dir) {
    if (std::abs(norm(unit_dir) - 1.0) > 1e-9) throw InvalidInput("array_response: direction is not unit length");
    const double ku = 2.0 * kPi * spec.element_spacing * dot(spec.axis_u, unit_dir);
    const double kv = 2.0 * kPi * spec.element_spacing * dot(spec.axis_v, unit_dir);
    const double c0 = 0.5 * static_cast<double>(spec.cols - 1);
    const double r0 = 0.5 * static_cast<double>(spec.rows - 1);
    std::vector<cplx> col(spec.cols), row(spec.rows);
    for (std::size_t c = 0; c < spec.cols; ++c) col[c] = std::polar(1.0, ku * (static_cast<double>(c) - c0));
    for (std::size_t r = 0; r < spec.rows; ++r) row[r] = std::polar(1.0, kv * (static_cast<double>(r) - r0));
    std::vector<cplx> a(spec.n_elements);
    for (std::size_t r = 0; r < spec.rows; ++r)
        for (std::size_t c = 0; c < spec.cols; ++c) a[r * spec.cols + c] = row[r] * col[c];
    return a;
}

/// Unit-modulus per-element terms e^{-j2pi f_c tau_r} a_RU[n] a_SR[n] of the reflected channel.
inline std::vector<cplx> reflected_terms(const ScenarioGeometry& g, const RISSpec& spec, const LinkBudget& b) {
    const Vec3 pu = embed_user(g.user, g.z0);
    const Distances d = distances(g);
    const double lambda = b.wavelength();
    std::vector<cplx> t = array_response(spec, unit(g.sat - g.ris));
    const std::vector<cplx> a_ru = array_response(spec, unit(pu - g.ris));
    const cplx common = path_phasor(d.d_sr, lambda) * path_phasor(d.d_ru, lambda);
    for (std::size_t n = 0; n < t.size(); ++n) t[n] *= a_ru[n] * common;
    return t;
}

inline cplx direct_channel(const ScenarioGeometry& g, const LinkBudget& b, const LargeScaleParams& p) {
    return std::sqrt(direct_gain(g, b, p)) * path_phasor(distances(g).d_su, b.wavelength());
}

inline cplx reflected_channel(const ScenarioGeometry& g, const RISSpec& spec, const RISConfig& cfg,
                              const LinkBudget& b, const LargeScaleParams& p) {
    if (cfg.phases.size() != spec.n_elements) throw InvalidInput("RIS configuration length differs from N");
    const std::vector<cplx> t = reflected_terms(g, spec, b);
    cplx s{0.0, 0.0};
    for (std::size_t n = 0; n < t.size(); ++n) s += t[n] * std::polar(1.0, cfg.phases[n]);
    return std::sqrt(sr_gain(g, b, p) * ru_gain(g, b, p.shadow_ru_db)) * s;
}

inline ChannelRealization realize_channel(const ScenarioGeometry& g, const RISSpec& spec, const RISConfig& cfg,
                                          const LinkBudget& b, const LargeScaleParams& p) {
    return {direct_channel(g, b, p), reflected_channel(g, spec, cfg, b, p), direct_gain(g, b, p),
            sr_gain(g, b, p), ru_gain(g, b, p.shadow_ru_db)};
}

inline double snr(cplx h_d, cplx h_r, const LinkBudget& b) { return b.snr_scale() * std::norm(h_d + h_r); }
inline double gamma_d(cplx h_d, const LinkBudget& b) { return b.snr_scale() * std::norm(h_d); }
inline double gamma_r(cplx h_r, const LinkBudget& b) { return b.snr_scale() * std::norm(h_r); }

} // namespace risntn
