// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>

#include "errors.hpp"

namespace risntn {

inline constexpr double kSpeedOfLight = 3.0e8;
inline constexpr double kPi = 3.14159265358979323846;

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

/// Unit vector along a; throws DegenerateGeometry for a zero vector.
inline Vec3 unit(Vec3 a) {
    const double n = norm(a);
    if (!(n > 0.0)) throw DegenerateGeometry("unit(): zero-length vector");
    return (1.0 / n) * a;
}

struct UserPos2D {
    double x = 0.0, y = 0.0;
    friend bool operator==(const UserPos2D&, const UserPos2D&) = default;
};

/// Row-major 2x2 matrix.
using Matrix2 = std::array<std::array<double, 2>, 2>;

struct ScenarioGeometry {
    Vec3 sat;
    Vec3 ris;
    UserPos2D user;
    double z0 = 1.5;
};

struct Distances {
    double d_su, d_sr, d_ru;
};

struct PathDelays {
    double tau_d, tau_sr, tau_ru, tau_r, delta_tau_r;
};

inline Vec3 embed_user(UserPos2D u, double z0) { return {u.x, u.y, z0}; }

/// Checks sat.z > ris.z > z0 >= 0 and finiteness; throws DegenerateGeometry.
inline void validate(const ScenarioGeometry& g) {
    const double v[] = {g.sat.x, g.sat.y, g.sat.z, g.ris.x, g.ris.y, g.ris.z, g.user.x, g.user.y, g.z0};
    for (double a : v)
        if (!std::isfinite(a)) throw DegenerateGeometry("non-finite coordinate");
    if (!(g.sat.z > g.ris.z && g.ris.z > g.z0 && g.z0 >= 0.0))
        throw DegenerateGeometry("height ordering sat.z > ris.z > z0 >= 0 violated");
}

inline Distances distances(const ScenarioGeometry& g) {
    const Vec3 pu = embed_user(g.user, g.z0);
    Distances d{norm(pu - g.sat), norm(g.ris - g.sat), norm(pu - g.ris)};
    if (!(d.d_su > 0.0 && d.d_sr > 0.0 && d.d_ru > 0.0))
        throw DegenerateGeometry("coincident positions");
    return d;
}

inline PathDelays path_delays(const ScenarioGeometry& g, double c = kSpeedOfLight) {
    const Distances d = distances(g);
    PathDelays p{};
    p.tau_d = d.d_su / c;
    p.tau_sr = d.d_sr / c;
    p.tau_ru = d.d_ru / c;
    p.tau_r = p.tau_sr + p.tau_ru;
    // excess path length evaluated before the division keeps rounding noise out of the sign
    p.delta_tau_r = std::max(0.0, (d.d_sr + d.d_ru - d.d_su) / c);
    return p;
}

/// Jacobian of (tau_d, delta_tau_r) with respect to (x_U, y_U) at fixed z0 [s/m].
inline Matrix2 delay_jacobian(const ScenarioGeometry& g, double c = kSpeedOfLight) {
    const Distances d = distances(g);
    const Vec3 pu = embed_user(g.user, g.z0);
    const Vec3 us = pu - g.sat;
    const Vec3 ur = pu - g.ris;
    Matrix2 J{};
    J[0][0] = us.x / (c * d.d_su);
    J[0][1] = us.y / (c * d.d_su);
    J[1][0] = (ur.x / d.d_ru - us.x / d.d_su) / c;
    J[1][1] = (ur.y / d.d_ru - us.y / d.d_su) / c;
    return J;
}

} // namespace risntn
