// Shared generators and oracles for the unit and acceptance suites.
#pragma once

#include <array>
#include <cmath>
#include <random>

#include "risntn/geometry.hpp"

namespace testing_support {

using risntn::ScenarioGeometry;

/// Satellite 300-1200 km up, RIS on a facade, user at street level, all within a few hundred metres.
inline ScenarioGeometry random_geometry(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> sat_xy(-1e6, 1e6), sat_z(3e5, 1.2e6);
    std::uniform_real_distribution<double> ris_xy(-500, 500), ris_z(5, 50), user_xy(-500, 500), z0(0, 3);
    for (;;) {
        ScenarioGeometry g{{sat_xy(rng), sat_xy(rng), sat_z(rng)},
                           {ris_xy(rng), ris_xy(rng), ris_z(rng)},
                           {user_xy(rng), user_xy(rng)},
                           z0(rng)};
        if (std::hypot(g.user.x - g.ris.x, g.user.y - g.ris.y) > 1.0) return g;
    }
}

/// Delays evaluated in extended precision from first principles.
inline std::array<long double, 2> ld_delays(const ScenarioGeometry& g, long double x, long double y, long double c) {
    auto dist = [](long double ax, long double ay, long double az, long double bx, long double by, long double bz) {
        return std::sqrt((ax - bx) * (ax - bx) + (ay - by) * (ay - by) + (az - bz) * (az - bz));
    };
    const long double d_su = dist(x, y, g.z0, g.sat.x, g.sat.y, g.sat.z);
    const long double d_sr = dist(g.ris.x, g.ris.y, g.ris.z, g.sat.x, g.sat.y, g.sat.z);
    const long double d_ru = dist(x, y, g.z0, g.ris.x, g.ris.y, g.ris.z);
    return {d_su / c, (d_sr + d_ru - d_su) / c};
}

/// Central finite differences of (tau_d, delta_tau_r) in the user ground coordinates.
inline std::array<std::array<long double, 2>, 2> fd_jacobian(const ScenarioGeometry& g, double h,
                                                             double c = risntn::kSpeedOfLight) {
    std::array<std::array<long double, 2>, 2> J{};
    const long double x = g.user.x, y = g.user.y, hh = h;
    const auto xp = ld_delays(g, x + hh, y, c), xm = ld_delays(g, x - hh, y, c);
    const auto yp = ld_delays(g, x, y + hh, c), ym = ld_delays(g, x, y - hh, c);
    for (int r = 0; r < 2; ++r) {
        J[r][0] = (xp[r] - xm[r]) / (2 * hh);
        J[r][1] = (yp[r] - ym[r]) / (2 * hh);
    }
    return J;
}

} // namespace testing_support
