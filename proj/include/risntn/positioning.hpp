// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

#include "errors.hpp"
#include "geometry.hpp"

namespace risntn {

struct DelayVarParams {
    double kappa_d = 1e-2;
    double kappa_r = 1e-2;
    double bandwidth = 20e6;
};

struct ReducedCov {
    double var_tau_d;
    double var_dtau_r;
};

using Fim2 = Matrix2;

inline constexpr double kFimDetTolerance = 1e-30;

inline ReducedCov delay_variances(double gamma_d, double gamma_r, const DelayVarParams& p) {
    if (!(gamma_d > 0.0) || !(gamma_r > 0.0)) throw ZeroSnr("delay variance undefined at zero SNR");
    const double b2 = p.bandwidth * p.bandwidth;
    return {p.kappa_d / (b2 * gamma_d), p.kappa_r / (b2 * gamma_r)};
}

/// jac^T diag(1/var) jac.
inline Fim2 fim(const Matrix2& jac, const ReducedCov& cov) {
    const double w0 = 1.0 / cov.var_tau_d;
    const double w1 = 1.0 / cov.var_dtau_r;
    Fim2 f{};
    f[0][0] = w0 * jac[0][0] * jac[0][0] + w1 * jac[1][0] * jac[1][0];
    f[1][1] = w0 * jac[0][1] * jac[0][1] + w1 * jac[1][1] * jac[1][1];
    f[0][1] = w0 * jac[0][0] * jac[0][1] + w1 * jac[1][0] * jac[1][1];
    f[1][0] = f[0][1];
    return f;
}

inline double peb(const Fim2& f) {
    const double det = f[0][0] * f[1][1] - f[0][1] * f[1][0];
    if (!(det > kFimDetTolerance)) throw SingularFim("position FIM is singular");
    return std::sqrt((f[0][0] + f[1][1]) / det);
}

/// PEB straight from the Jacobian. det(J^T W J) = det(W) det(J)^2 avoids the cancellation in the FIM determinant.
inline double peb_from_jacobian(const Matrix2& jac, const ReducedCov& cov) {
    const Fim2 f = fim(jac, cov);
    const double dj = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
    const double det = dj * dj / (cov.var_tau_d * cov.var_dtau_r);
    if (!(det > kFimDetTolerance)) throw SingularFim("position FIM is singular");
    return std::sqrt((f[0][0] + f[1][1]) / det);
}

} // namespace risntn
