// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "codebook.hpp"
#include "errors.hpp"
#include "link.hpp"

namespace risntn {

enum class Mode { C, B, P };

inline const char* mode_name(Mode m) {
    switch (m) {
    case Mode::C: return "C";
    case Mode::B: return "B";
    case Mode::P: return "P";
    }
    return "?";
}

struct ModePolicy {
    double xi_l = 0.08;
    double xi_h = 0.30;
    double alpha_c = 0.92;
    double alpha_b = 0.55;
    double alpha_p = 0.15;

    bool valid() const {
        return 0.0 < xi_l && xi_l < xi_h && xi_h <= 1.0 && 1.0 >= alpha_c && alpha_c > alpha_b &&
               alpha_b > alpha_p && alpha_p >= 0.0;
    }
};

struct UtilityRefs {
    double gamma_ref = 1.0;
    double peb_ref = 1.0;
};

struct Selection {
    std::size_t codeword_id = 0;
    Mode mode = Mode::C;
    double gamma = 0.0;
    double peb = 0.0;
    bool peb_valid = false;
    double utility = 0.0;
};

inline std::pair<double, Mode> select_alpha(double xi_blk, const ModePolicy& p) {
    if (!(xi_blk > 0.0 && xi_blk <= 1.0)) throw InvalidInput("blockage factor must lie in (0,1]");
    if (xi_blk >= p.xi_h) return {p.alpha_c, Mode::C};
    if (xi_blk <= p.xi_l) return {p.alpha_p, Mode::P};
    return {p.alpha_b, Mode::B};
}

inline double utility(double gamma, double peb, double alpha, const UtilityRefs& r) {
    if (!(peb > 0.0)) throw InvalidInput("utility: PEB must be positive");
    return alpha * gamma / r.gamma_ref + (1.0 - alpha) * r.peb_ref / peb;
}

// -----------------------------------------------------------------------------
// Per-codeword evaluation
// -----------------------------------------------------------------------------

/// Metrics of every codeword at one user position, blockage and shadowing level.
/// Shadowing enters only through a common amplitude factor, so the array sums can be reused.
inline std::vector<LinkMetrics> evaluate_all(const UserLink& link, const std::vector<cplx>& sums, double blockage,
                                             double shadow_db) {
    std::vector<LinkMetrics> out(sums.size());
    for (std::size_t m = 0; m < sums.size(); ++m) out[m] = link.metrics(sums[m], blockage, shadow_db);
    return out;
}

inline std::vector<cplx> codebook_sums(const UserLink& link, const std::vector<std::vector<cplx>>& weights) {
    std::vector<cplx> s(weights.size());
    for (std::size_t m = 0; m < weights.size(); ++m) s[m] = link.coherent_sum(weights[m]);
    return s;
}

/// Nominal (gamma, PEB) of one codeword; throws ZeroSnr or SingularFim.
inline std::pair<double, double> evaluate_codeword(const ScenarioGeometry& g, const RISSpec& spec, const Codeword& cw,
                                                   const LinkBudget& budget, const LargeScaleParams& params,
                                                   const DelayVarParams& dvp) {
    const cplx hd = direct_channel(g, budget, params);
    const cplx hr = reflected_channel(g, spec, cw.config, budget, params);
    const double gd = gamma_d(hd, budget);
    const double gr = gamma_r(hr, budget);
    const double p = peb(fim(delay_jacobian(g, budget.c), delay_variances(gd, gr, dvp)));
    return {snr(hd, hr, budget), p};
}

/// Same pipeline with the RIS-user shadowing replaced by the conservative level x_wc.
inline std::pair<double, double> robust_evaluate(const ScenarioGeometry& g, const RISSpec& spec, const Codeword& cw,
                                                 const LinkBudget& budget, LargeScaleParams params,
                                                 const DelayVarParams& dvp, double x_wc) {
    params.shadow_ru_db = x_wc;
    return evaluate_codeword(g, spec, cw, budget, params, dvp);
}

// -----------------------------------------------------------------------------
// Selection rules
// -----------------------------------------------------------------------------

/// Argmax of score over codewords; nullopt scores are excluded, ties go to the lowest id.
inline std::size_t argmax_feasible(const std::vector<LinkMetrics>& ms,
                                   const std::function<std::optional<double>(const LinkMetrics&)>& score) {
    std::optional<std::size_t> best;
    double best_v = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < ms.size(); ++m) {
        const auto v = score(ms[m]);
        if (!v || std::isnan(*v)) continue;
        if (!best || *v > best_v) {
            best = m;
            best_v = *v;
        }
    }
    if (!best) throw NoFeasibleCodeword("no codeword could be evaluated");
    return *best;
}

inline std::optional<double> joint_score(const LinkMetrics& m, double alpha, const UtilityRefs& r) {
    if (!std::isfinite(m.gamma)) return std::nullopt;
    if (!m.peb_valid) return alpha * m.gamma / r.gamma_ref;
    return utility(m.gamma, m.peb, alpha, r);
}

inline Selection make_selection(const std::vector<LinkMetrics>& ms, std::size_t id, Mode mode, double util) {
    return {id, mode, ms[id].gamma, ms[id].peb, ms[id].peb_valid, util};
}

/// Argmax of the utility over metrics evaluated at the shadowing level the caller chose
/// (conservative level for the robust rule, raw estimate for the nominal rule).
inline Selection select_joint(const std::vector<LinkMetrics>& ms, double alpha, const UtilityRefs& r,
                              Mode mode = Mode::B) {
    const auto id = argmax_feasible(ms, [&](const LinkMetrics& m) { return joint_score(m, alpha, r); });
    return make_selection(ms, id, mode, *joint_score(ms[id], alpha, r));
}

inline Selection select_comm_only(const std::vector<LinkMetrics>& ms) {
    const auto id = argmax_feasible(ms, [](const LinkMetrics& m) -> std::optional<double> {
        if (!std::isfinite(m.gamma)) return std::nullopt;
        return m.gamma;
    });
    return make_selection(ms, id, Mode::C, ms[id].gamma);
}

inline Selection select_pos_only(const std::vector<LinkMetrics>& ms) {
    const auto id = argmax_feasible(ms, [](const LinkMetrics& m) -> std::optional<double> {
        if (!m.peb_valid) return std::nullopt;
        return -m.peb;
    });
    return make_selection(ms, id, Mode::P, -ms[id].peb);
}

/// Inputs the selection rules need for one block.
struct SelectionContext {
    const UserLink* link = nullptr;
    const std::vector<cplx>* sums = nullptr;
    double blockage = 1.0;
    double shadow_nominal_db = 0.0; // level used by the nominal rules
    double x_wc = 0.0;              // conservative level used by the robust rule
};

inline Selection select_robust(const SelectionContext& ctx, double alpha, const UtilityRefs& r, Mode mode = Mode::B) {
    return select_joint(evaluate_all(*ctx.link, *ctx.sums, ctx.blockage, ctx.x_wc), alpha, r, mode);
}

inline Selection select_joint_nominal(const SelectionContext& ctx, double alpha, const UtilityRefs& r,
                                      Mode mode = Mode::B) {
    return select_joint(evaluate_all(*ctx.link, *ctx.sums, ctx.blockage, ctx.shadow_nominal_db), alpha, r, mode);
}

inline Selection select_comm_only(const SelectionContext& ctx) {
    return select_comm_only(evaluate_all(*ctx.link, *ctx.sums, ctx.blockage, ctx.shadow_nominal_db));
}

inline Selection select_pos_only(const SelectionContext& ctx) {
    return select_pos_only(evaluate_all(*ctx.link, *ctx.sums, ctx.blockage, ctx.shadow_nominal_db));
}

// -----------------------------------------------------------------------------
// Continuous-phase reference
// -----------------------------------------------------------------------------

struct UpperBound {
    double gamma;
    double peb;
    bool peb_valid;
    double utility;
    std::vector<double> phases;
};

/// Every reflected term aligned with the direct path: maximises gamma and gamma_r together.
inline UpperBound continuous_upper_bound(const UserLink& link, double blockage, double shadow_db, double alpha,
                                         const UtilityRefs& r) {
    const cplx hd = link.h_d(blockage);
    const double n = static_cast<double>(link.size());
    const cplx hr = link.reflected_amplitude(shadow_db) * n * std::polar(1.0, std::arg(hd));
    const LinkMetrics m = link.metrics_from_channels(hd, hr);
    const auto u = joint_score(m, alpha, r);
    return {m.gamma, m.peb, m.peb_valid, u.value_or(0.0), alignment_phases(link.terms(), std::arg(hd))};
}

inline UpperBound continuous_upper_bound(const Scenario& sc, UserPos2D u, double blockage, double shadow_db,
                                         double alpha, const UtilityRefs& r) {
    return continuous_upper_bound(UserLink(sc, u), blockage, shadow_db, alpha, r);
}

/// References from the middle Balanced codeword at the region centre, blockage 0.3, no shadowing.
inline UtilityRefs default_refs(const Scenario& sc, const Codebook& cb, UserPos2D centre) {
    std::vector<std::size_t> bal;
    for (const auto& cw : cb.codewords)
        if (cw.family == Family::Balanced) bal.push_back(cw.id);
    const std::size_t id = bal.empty() ? 0 : bal[bal.size() / 2];
    const UserLink link(sc, centre);
    const LinkMetrics m = link.metrics(link.coherent_sum(phase_weights(cb.codewords[id].config.phases)), 0.3, 0.0);
    if (!(m.gamma > 0.0) || !m.peb_valid) throw InvalidConfig("reference operating point has no valid PEB");
    return {m.gamma, m.peb};
}

} // namespace risntn
