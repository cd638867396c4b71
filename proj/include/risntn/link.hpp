// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "channel.hpp"
#include "geometry.hpp"
#include "positioning.hpp"

namespace risntn {

/// Everything about the deployment that stays fixed across users and blocks.
struct Scenario {
    Vec3 sat{350000.0, 0.0, 600000.0};
    Vec3 ris{100.0, 0.0, 20.0};
    double z0 = 1.5;
    LinkBudget budget = link_budget(31.0, 20e6, 7.0, 2.2e9);
    RISSpec ris_spec = RISSpec::square(1024);
    double atm_su_db = 1.0;
    double atm_sr_db = 0.8;
    double excess_su_db = 0.0;
    double excess_sr_db = 0.0;
    DelayVarParams dvp{1e-2, 1e-2, 20e6};

    ScenarioGeometry geometry(UserPos2D u) const { return {sat, ris, u, z0}; }

    LargeScaleParams params(double blockage, double shadow_ru_db) const {
        return {atm_su_db, atm_sr_db, excess_su_db, excess_sr_db, shadow_ru_db, blockage};
    }
};

struct LinkMetrics {
    double gamma = 0.0;
    double gamma_d = 0.0;
    double gamma_r = 0.0;
    double peb = 0.0;
    bool peb_valid = false;
};

/// Per-user-position precomputation: large-scale gains at unit blockage and zero shadowing,
/// the direct-path phasor, the delay Jacobian and the unit-modulus reflected element terms.
class UserLink {
public:
    UserLink(const Scenario& sc, UserPos2D u) : geom_(sc.geometry(u)), dvp_(sc.dvp), snr_scale_(sc.budget.snr_scale()) {
        const LargeScaleParams base = sc.params(1.0, 0.0);
        beta_su_unblocked_ = direct_gain(geom_, sc.budget, base);
        beta_sr_ = sr_gain(geom_, sc.budget, base);
        beta_ru0_ = ru_gain(geom_, sc.budget, 0.0);
        hd_phasor_ = path_phasor(distances(geom_).d_su, sc.budget.wavelength());
        terms_ = reflected_terms(geom_, sc.ris_spec, sc.budget);
        jac_ = delay_jacobian(geom_, sc.budget.c);
        const double dj = jac_[0][0] * jac_[1][1] - jac_[0][1] * jac_[1][0];
        dj2_ = dj * dj;
        row0_ = jac_[0][0] * jac_[0][0] + jac_[0][1] * jac_[0][1];
        row1_ = jac_[1][0] * jac_[1][0] + jac_[1][1] * jac_[1][1];
    }

    const ScenarioGeometry& geometry() const { return geom_; }
    const Matrix2& jacobian() const { return jac_; }
    const std::vector<cplx>& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }

    cplx h_d(double blockage) const { return std::sqrt(blockage * beta_su_unblocked_) * hd_phasor_; }

    /// Amplitude factor sqrt(beta_SR beta_RU) of the reflected channel at a given shadowing level.
    double reflected_amplitude(double shadow_db) const {
        return std::sqrt(beta_sr_ * beta_ru0_ * db_to_linear(-shadow_db));
    }

    /// Sum_n t_n w_n for unit-modulus weights w_n = e^{j phi_n}.
    cplx coherent_sum(std::span<const cplx> weights) const {
        if (weights.size() != terms_.size()) throw InvalidInput("weight vector length differs from N");
        double re = 0.0, im = 0.0;
        for (std::size_t n = 0; n < terms_.size(); ++n) {
            const cplx p = terms_[n] * weights[n];
            re += p.real();
            im += p.imag();
        }
        return {re, im};
    }

    /// SNRs and PEB given the array sum. The PEB is flagged invalid instead of throwing.
    LinkMetrics metrics(cplx sum, double blockage, double shadow_db) const {
        return metrics_from_channels(h_d(blockage), reflected_amplitude(shadow_db) * sum);
    }

    LinkMetrics metrics_from_channels(cplx hd, cplx hr) const {
        LinkMetrics m;
        m.gamma = snr_scale_ * std::norm(hd + hr);
        m.gamma_d = snr_scale_ * std::norm(hd);
        m.gamma_r = snr_scale_ * std::norm(hr);
        if (m.gamma_d > 0.0 && m.gamma_r > 0.0) {
            const double b2 = dvp_.bandwidth * dvp_.bandwidth;
            const double w0 = b2 * m.gamma_d / dvp_.kappa_d;
            const double w1 = b2 * m.gamma_r / dvp_.kappa_r;
            const double det = w0 * w1 * dj2_;
            if (det > kFimDetTolerance) {
                m.peb = std::sqrt((w0 * row0_ + w1 * row1_) / det);
                m.peb_valid = true;
            }
        }
        return m;
    }

private:
    ScenarioGeometry geom_;
    DelayVarParams dvp_;
    double snr_scale_;
    double beta_su_unblocked_ = 0.0, beta_sr_ = 0.0, beta_ru0_ = 0.0;
    cplx hd_phasor_;
    std::vector<cplx> terms_;
    Matrix2 jac_{};
    double dj2_ = 0.0, row0_ = 0.0, row1_ = 0.0;
};

} // namespace risntn
