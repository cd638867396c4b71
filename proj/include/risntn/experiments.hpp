// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "codebook.hpp"
#include "config.hpp"
#include "controller.hpp"
#include "link.hpp"
#include "shadowing.hpp"

namespace risntn {

// =============================================================================
// Seeds and parallel execution
// =============================================================================

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
    return splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index);
}

inline Rng trial_rng(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
    return Rng(derive_seed(master, stream, index));
}

namespace stream {
inline constexpr std::uint64_t kPebVsX = 0x1001;
inline constexpr std::uint64_t kTradeoff = 0x1002;
inline constexpr std::uint64_t kSwitching = 0x1003;
inline constexpr std::uint64_t kFamily = 0x1004;
inline constexpr std::uint64_t kDecision = 0x1005;
inline constexpr std::uint64_t kPsucc = 0x1006;
inline constexpr std::uint64_t kSpatial = 0x1007;
inline constexpr std::uint64_t kSummary = 0x1008;
} // namespace stream

struct RunOptions {
    unsigned jobs = 1;
};

/// f(i) for i in [0, n), results in index order whatever the thread count.
template <class F>
auto parallel_map(std::size_t n, unsigned jobs, F f) -> std::vector<decltype(f(std::size_t{0}))> {
    std::vector<decltype(f(std::size_t{0}))> out(n);
    const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i; !failed && (i = next.fetch_add(1)) < n;) {
                try {
                    out[i] = f(i);
                } catch (...) {
                    if (!failed.exchange(true)) err = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
    return out;
}

// =============================================================================
// Metrics
// =============================================================================

inline bool success_indicator(double gamma_db, double peb, double gamma_th_db, double eta_th) {
    return gamma_db >= gamma_th_db && peb <= eta_th;
}

inline double switching_rate(const std::vector<std::size_t>& ids) {
    if (ids.size() < 2) throw InvalidInput("switching_rate needs at least two blocks");
    std::size_t changes = 0;
    for (std::size_t k = 1; k < ids.size(); ++k) changes += ids[k] != ids[k - 1];
    return static_cast<double>(changes) / static_cast<double>(ids.size() - 1);
}

struct Interval {
    double lo, hi;
};

inline constexpr double kZ95 = 1.959963984540054;

inline Interval wilson_interval(std::size_t k, std::size_t n, double z = kZ95) {
    if (n == 0) return {0.0, 1.0};
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double den = 1.0 + z2 / nn;
    const double centre = (p + z2 / (2.0 * nn)) / den;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / den;
    return {k == 0 ? 0.0 : std::max(0.0, centre - half), k == n ? 1.0 : std::min(1.0, centre + half)};
}

/// Outcome of one scheme on one realization, evaluated at the true shadowing.
struct Outcome {
    std::size_t id = std::numeric_limits<std::size_t>::max();
    Family family = Family::Comm;
    Mode mode = Mode::C;
    double gamma = 0.0;
    double peb = 0.0;
    bool peb_valid = false;
    bool censored = false;
};

struct Thresholds {
    double snr_db;
    double peb_m;
};

/// Averages over one scheme's outcomes. SNR is averaged over trials with a selection, PEB over trials
/// with a finite bound; trials without a finite PEB are counted as censored and as failures.
struct Aggregate {
    std::size_t n = 0, censored = 0, successes = 0, n_gamma = 0, n_peb = 0;
    double sum_gamma = 0.0, sum_peb = 0.0;

    void add(const Outcome& o, const Thresholds& th) {
        ++n;
        if (!o.censored) {
            ++n_gamma;
            sum_gamma += o.gamma;
        }
        if (o.censored || !o.peb_valid) {
            ++censored;
            return;
        }
        ++n_peb;
        sum_peb += o.peb;
        successes += success_indicator(linear_to_db(o.gamma), o.peb, th.snr_db, th.peb_m);
    }

    void merge(const Aggregate& a) {
        n += a.n;
        censored += a.censored;
        successes += a.successes;
        n_gamma += a.n_gamma;
        n_peb += a.n_peb;
        sum_gamma += a.sum_gamma;
        sum_peb += a.sum_peb;
    }

    double avg_snr_db() const { return n_gamma ? linear_to_db(sum_gamma / static_cast<double>(n_gamma)) : std::nan(""); }
    double avg_peb() const { return n_peb ? sum_peb / static_cast<double>(n_peb) : std::nan(""); }
    double p_succ() const { return n ? static_cast<double>(successes) / static_cast<double>(n) : std::nan(""); }
    Interval p_succ_ci() const { return wilson_interval(successes, n); }
};

// =============================================================================
// Prepared scenario
// =============================================================================

inline Scenario make_scenario(const ExperimentConfig& c, std::size_t n_elements) {
    Scenario sc;
    sc.sat = c.satellite;
    sc.ris = c.ris;
    sc.z0 = c.user_height;
    sc.budget = link_budget(c.eirp_density_dbw_per_mhz, c.bandwidth_hz, c.noise_figure_db, c.carrier_freq_hz);
    sc.budget.c = c.speed_of_light;
    sc.ris_spec = RISSpec::square(n_elements, c.element_spacing);
    sc.atm_su_db = c.atm_su_db;
    sc.atm_sr_db = c.atm_sr_db;
    sc.excess_su_db = c.excess_su_db;
    sc.excess_sr_db = c.excess_sr_db;
    sc.dvp = {c.kappa_d, c.kappa_r, c.bandwidth_hz};
    return sc;
}

struct Prepared {
    ExperimentConfig cfg;
    Scenario sc;
    Codebook cb;
    std::vector<std::vector<cplx>> weights;
    UtilityRefs refs;
    ShadowFieldParams shadow;
    Thresholds th;
};

/// Scenario, codebook, weights and references for one (N, b) pair. The codebook file, when set,
/// is only used at the configured N and b.
inline Prepared prepare(const ExperimentConfig& c, std::optional<std::size_t> n_override = std::nullopt,
                        std::optional<unsigned> b_override = std::nullopt) {
    validate_config(c);
    Prepared p;
    p.cfg = c;
    const std::size_t N = n_override.value_or(c.n_elements);
    const unsigned b = b_override.value_or(c.phase_bits);
    p.sc = make_scenario(c, N);
    if (c.codebook_file && N == c.n_elements && b == c.phase_bits) {
        p.cb = load_codebook(*c.codebook_file);
        if (p.cb.n_elements != N || p.cb.bits != b)
            throw InvalidConfig("codebook file does not match ris.n_elements / ris.phase_bits");
    } else {
        const auto anchors = c.anchors.empty() ? default_anchors(c.region.x_min, c.region.x_max, c.region.y_min,
                                                                 c.region.y_max, c.codebook_size / 3)
                                               : c.anchors;
        p.cb = build_codebook(p.sc, b, c.codebook_size, anchors);
    }
    p.weights = codebook_weights(p.cb);
    p.refs = default_refs(p.sc, p.cb, c.region.centre());
    if (c.gamma_ref_db) p.refs.gamma_ref = db_to_linear(*c.gamma_ref_db);
    if (c.peb_ref_m) p.refs.peb_ref = *c.peb_ref_m;
    p.shadow = {c.sigma_ru_db, c.corr_distance_m};
    p.th = {c.snr_threshold_db, c.peb_threshold_m};
    return p;
}

// =============================================================================
// One realization, all schemes
// =============================================================================

/// Realization seen by every scheme in a trial.
struct Realization {
    UserPos2D user;
    double xi = 1.0;
    double x_true = 0.0;  // dB, actual RIS-user shadowing
    double x_meas = 0.0;  // dB, pilot measurement used by the nominal rules
    ShadowTracker tracker; // posterior after the measurement
    double x_wc = 0.0;    // dB, conservative level used by the robust rule
};

/// Independent single-block realization: the tracker starts at the stationary prior and absorbs one pilot
/// measurement, which gives the exact posterior of the shadowing state.
inline Realization draw_static(const Prepared& p, Rng& rng, std::optional<UserPos2D> fixed_user = std::nullopt,
                               std::optional<double> fixed_xi = std::nullopt,
                               std::optional<double> fixed_x = std::nullopt) {
    const ExperimentConfig& c = p.cfg;
    std::uniform_real_distribution<double> ux(c.region.x_min, c.region.x_max);
    std::uniform_real_distribution<double> uy(c.region.y_min, c.region.y_max);
    std::uniform_real_distribution<double> uxi(c.xi_min, c.xi_max);
    std::normal_distribution<double> z(0.0, 1.0);
    Realization r;
    r.user = {ux(rng), uy(rng)};
    r.xi = uxi(rng);
    const double zx = z(rng), zm = z(rng);
    if (fixed_user) {
        r.user.x = fixed_user->x;
        if (!std::isnan(fixed_user->y)) r.user.y = fixed_user->y;
    }
    if (fixed_xi) r.xi = *fixed_xi;
    const double r_x = c.meas_noise_var_db2;
    const double r_filter = c.filter_r_x.value_or(r_x);
    r.x_true = fixed_x.value_or(c.sigma_ru_db * zx);
    r.x_meas = r.x_true + std::sqrt(r_x) * zm;
    r.tracker = kf_step(ShadowTracker::stationary_prior(p.shadow), 1.0, r.x_meas, {0.0, r_filter});
    r.x_wc = worst_case_shadow(r.tracker, c.nu);
    return r;
}

class TrialEvaluator {
public:
    TrialEvaluator(const Prepared& p, const Realization& r)
        : p_(p), r_(r), link_(p.sc, r.user), sums_(codebook_sums(link_, p.weights)),
          truth_(evaluate_all(link_, sums_, r.xi, r.x_true)), nominal_(evaluate_all(link_, sums_, r.xi, r.x_meas)),
          robust_(evaluate_all(link_, sums_, r.xi, r.x_wc)) {}

    std::pair<double, Mode> adaptive_alpha() const { return select_alpha(r_.xi, p_.cfg.policy); }

    Outcome direct_only() const {
        Outcome o;
        o.mode = adaptive_alpha().second;
        o.gamma = snr(link_.h_d(r_.xi), cplx{0.0, 0.0}, p_.sc.budget);
        o.peb_valid = false; // no excess-delay observation without the RIS
        return o;
    }

    // single-objective benchmarks score the instantaneous metrics at the actual shadowing
    Outcome comm_only() const {
        return guarded(Mode::C, [&] { return select_comm_only(truth_).codeword_id; });
    }
    Outcome pos_only() const {
        return guarded(Mode::P, [&] { return select_pos_only(truth_).codeword_id; });
    }
    Outcome joint_nominal(double alpha, Mode mode) const {
        return guarded(mode, [&] { return select_joint(nominal_, alpha, p_.refs).codeword_id; });
    }
    Outcome robust(double alpha, Mode mode) const {
        return guarded(mode, [&] { return select_joint(robust_, alpha, p_.refs).codeword_id; });
    }
    Outcome joint_nominal() const {
        const auto [a, m] = adaptive_alpha();
        return joint_nominal(a, m);
    }
    Outcome robust() const {
        const auto [a, m] = adaptive_alpha();
        return robust(a, m);
    }

    Outcome upper_bound(double alpha, Mode mode) const {
        const UpperBound ub = continuous_upper_bound(link_, r_.xi, r_.x_true, alpha, p_.refs);
        Outcome o;
        o.mode = mode;
        o.gamma = ub.gamma;
        o.peb = ub.peb;
        o.peb_valid = ub.peb_valid;
        return o;
    }

    const UserLink& link() const { return link_; }
    const std::vector<cplx>& sums() const { return sums_; }
    const std::vector<LinkMetrics>& truth() const { return truth_; }
    const std::vector<LinkMetrics>& nominal() const { return nominal_; }
    const std::vector<LinkMetrics>& robust_metrics() const { return robust_; }

private:
    template <class Pick>
    Outcome guarded(Mode mode, Pick pick) const {
        Outcome o;
        o.mode = mode;
        try {
            o.id = pick();
        } catch (const NoFeasibleCodeword&) {
            o.censored = true;
            return o;
        }
        o.family = p_.cb.codewords[o.id].family;
        o.gamma = truth_[o.id].gamma;
        o.peb = truth_[o.id].peb;
        o.peb_valid = truth_[o.id].peb_valid;
        return o;
    }

    const Prepared& p_;
    Realization r_;
    UserLink link_;
    std::vector<cplx> sums_;
    std::vector<LinkMetrics> truth_, nominal_, robust_;
};

// =============================================================================
// Tables
// =============================================================================

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::string to_csv() const {
        std::string s;
        auto line = [&](const std::vector<std::string>& v) {
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) s += ',';
                s += v[i];
            }
            s += '\n';
        };
        line(columns);
        for (const auto& r : rows) line(r);
        return s;
    }

    std::size_t column(const std::string& name_) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name_) return i;
        throw InvalidInput("no column " + name_);
    }
};

inline std::string num(double v) {
    if (std::isnan(v)) return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}
inline std::string num(std::size_t v) { return std::to_string(v); }

struct PresetResult {
    std::string preset;
    std::vector<Table> tables;
};

// =============================================================================
// Aggregation helpers
// =============================================================================

inline std::vector<std::string> stats_cells(const Aggregate& a) {
    const Interval ci = a.p_succ_ci();
    return {num(a.n),          num(a.censored),   num(a.avg_snr_db()), num(a.avg_peb()),
            num(a.p_succ()),   num(ci.lo),        num(ci.hi)};
}

inline const std::vector<std::string> kStatsColumns{"trials", "censored", "avg_snr_db", "avg_peb_m",
                                                    "p_succ", "p_succ_ci_low", "p_succ_ci_high"};

inline std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = n == 1 ? 0.5 * (a + b) : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

inline std::vector<double> cell_centres(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    return v;
}

// =============================================================================
// Static trial batches (exposed for tests)
// =============================================================================

enum SummaryScheme : std::size_t {
    kDirectOnly,
    kCommOnly,
    kPosOnly,
    kJointNominal,
    kJointAlphaC,
    kJointAlphaB,
    kJointAlphaP,
    kProposed,
    kUpperBound,
    kSummarySchemes
};

inline const std::array<const char*, kSummarySchemes> kSummaryNames{
    "direct_only", "comm_only", "pos_only", "joint_nominal", "joint_alpha_c",
    "joint_alpha_b", "joint_alpha_p", "proposed_robust", "continuous_upper_bound"};

using SummaryTrial = std::array<Outcome, kSummarySchemes>;

inline std::vector<SummaryTrial> simulate_summary(const Prepared& p, const RunOptions& opt) {
    const ModePolicy& pol = p.cfg.policy;
    return parallel_map(p.cfg.trials.summary, opt.jobs, [&](std::size_t i) {
        Rng rng = trial_rng(p.cfg.seed, stream::kSummary, i);
        const TrialEvaluator ev(p, draw_static(p, rng));
        const auto [a, m] = ev.adaptive_alpha();
        SummaryTrial t;
        t[kDirectOnly] = ev.direct_only();
        t[kCommOnly] = ev.comm_only();
        t[kPosOnly] = ev.pos_only();
        t[kJointNominal] = ev.joint_nominal(a, m);
        t[kJointAlphaC] = ev.robust(pol.alpha_c, Mode::C);
        t[kJointAlphaB] = ev.robust(pol.alpha_b, Mode::B);
        t[kJointAlphaP] = ev.robust(pol.alpha_p, Mode::P);
        t[kProposed] = ev.robust(a, m);
        t[kUpperBound] = ev.upper_bound(a, m);
        return t;
    });
}

/// Selected-family counts (comm, balanced, pos) of the proposed controller at one blockage value.
struct FamilyCounts {
    std::size_t trials = 0;
    std::array<std::size_t, 3> count{0, 0, 0};
    Aggregate stats;
};

inline std::size_t family_index(Family f) {
    switch (f) {
    case Family::Comm: return 0;
    case Family::Balanced: return 1;
    case Family::Pos: return 2;
    }
    return 0;
}

inline FamilyCounts simulate_family(const Prepared& p, double xi, std::size_t xi_index, const RunOptions& opt) {
    const std::size_t T = p.cfg.trials.family_trials;
    const auto outs = parallel_map(T, opt.jobs, [&](std::size_t j) {
        Rng rng = trial_rng(p.cfg.seed, stream::kFamily, xi_index * T + j);
        return TrialEvaluator(p, draw_static(p, rng, std::nullopt, xi)).robust();
    });
    FamilyCounts fc;
    for (const auto& o : outs) {
        ++fc.trials;
        if (!o.censored) ++fc.count[family_index(o.family)];
        fc.stats.add(o, p.th);
    }
    return fc;
}

// =============================================================================
// Trajectories
// =============================================================================

struct TrajectoryResult {
    double rate_robust = 0.0, rate_nominal = 0.0;
    Aggregate robust, nominal;
};

/// Straight walk along +x at fixed y and blockage, AR(1) shadowing along the path, per-block pilot measurement
/// with variance r_x. The robust rule uses the Kalman conservative level, the nominal rule the raw measurement.
/// Trajectory draws do not depend on r_x, so every noise level sees the same paths and shadowing.
inline TrajectoryResult simulate_trajectory(const Prepared& p, double r_x, std::size_t index) {
    const ExperimentConfig& c = p.cfg;
    const TrialCounts& t = c.trials;
    Rng rng = trial_rng(c.seed, stream::kSwitching, index);
    const double span = static_cast<double>(t.switching_blocks - 1) * t.switching_step_m;
    const double x_hi = std::max(c.region.x_min, c.region.x_max - span);
    std::uniform_real_distribution<double> ux(c.region.x_min, x_hi);
    std::uniform_real_distribution<double> uy(c.region.y_min, c.region.y_max);
    std::uniform_real_distribution<double> uxi(c.xi_min, c.xi_max);
    std::normal_distribution<double> z(0.0, 1.0);
    const double x0 = ux(rng), y = uy(rng), xi = uxi(rng);

    const double rho = ar1_rho(t.switching_step_m, c.corr_distance_m);
    const double q_true = stationary_q(c.sigma_ru_db, rho);
    const KalmanParams kp{c.filter_q_x.value_or(q_true), c.filter_r_x.value_or(r_x)};
    const auto [alpha, mode] = select_alpha(xi, c.policy);

    ShadowTracker tr = ShadowTracker::stationary_prior(p.shadow);
    double x = c.sigma_ru_db * z(rng);
    std::vector<std::size_t> ids_rob, ids_nom;
    TrajectoryResult res;
    for (std::size_t k = 0; k < t.switching_blocks; ++k) {
        const double zp = z(rng), zm = z(rng);
        if (k > 0) x = rho * x + std::sqrt(q_true) * zp;
        Realization r;
        r.user = {x0 + static_cast<double>(k) * t.switching_step_m, y};
        r.xi = xi;
        r.x_true = x;
        r.x_meas = x + std::sqrt(r_x) * zm;
        tr = kf_step(tr, k == 0 ? 1.0 : rho, r.x_meas, k == 0 ? KalmanParams{0.0, kp.r_x} : kp);
        r.tracker = tr;
        r.x_wc = worst_case_shadow(tr, c.nu);
        const TrialEvaluator ev(p, r);
        const Outcome rob = ev.robust(alpha, mode);
        const Outcome nom = ev.joint_nominal(alpha, mode);
        ids_rob.push_back(rob.id);
        ids_nom.push_back(nom.id);
        res.robust.add(rob, p.th);
        res.nominal.add(nom, p.th);
    }
    res.rate_robust = switching_rate(ids_rob);
    res.rate_nominal = switching_rate(ids_nom);
    return res;
}

inline std::vector<TrajectoryResult> simulate_switching(const Prepared& p, double r_x, const RunOptions& opt) {
    return parallel_map(p.cfg.trials.switching_trajectories, opt.jobs,
                        [&](std::size_t i) { return simulate_trajectory(p, r_x, i); });
}

struct SwitchingSummary {
    double rate_robust, rate_nominal;
    Interval ci_robust, ci_nominal;
    double diff_mean, diff_se; // robust minus nominal, paired over trajectories
    Aggregate robust, nominal;
};

inline SwitchingSummary summarize_switching(const std::vector<TrajectoryResult>& rs) {
    SwitchingSummary s{};
    const double n = static_cast<double>(rs.size());
    auto mean_sd = [&](auto get) {
        double m = 0.0;
        for (const auto& r : rs) m += get(r);
        m /= n;
        double v = 0.0;
        for (const auto& r : rs) v += (get(r) - m) * (get(r) - m);
        const double sd = rs.size() > 1 ? std::sqrt(v / (n - 1.0)) : 0.0;
        return std::pair{m, sd};
    };
    const auto [mr, sr] = mean_sd([](const TrajectoryResult& r) { return r.rate_robust; });
    const auto [mn, sn] = mean_sd([](const TrajectoryResult& r) { return r.rate_nominal; });
    const auto [md, sd] = mean_sd([](const TrajectoryResult& r) { return r.rate_robust - r.rate_nominal; });
    s.rate_robust = mr;
    s.rate_nominal = mn;
    s.ci_robust = {mr - kZ95 * sr / std::sqrt(n), mr + kZ95 * sr / std::sqrt(n)};
    s.ci_nominal = {mn - kZ95 * sn / std::sqrt(n), mn + kZ95 * sn / std::sqrt(n)};
    s.diff_mean = md;
    s.diff_se = sd / std::sqrt(n);
    for (const auto& r : rs) {
        s.robust.merge(r.robust);
        s.nominal.merge(r.nominal);
    }
    return s;
}

// =============================================================================
// Presets
// =============================================================================

inline PresetResult preset_peb_vs_x(const ExperimentConfig& c, const RunOptions& opt = {}) {
    const Prepared p = prepare(c);
    const auto xs = linspace(c.region.x_min, c.region.x_max, c.trials.peb_x_points);
    const std::size_t R = c.trials.peb_x_realizations;
    constexpr std::size_t kS = 5;
    const std::array<const char*, kS> names{"comm_only", "pos_only", "joint_nominal", "joint_robust",
                                            "continuous_upper_bound"};
    const auto outs = parallel_map(xs.size() * R, opt.jobs, [&](std::size_t i) {
        Rng rng = trial_rng(c.seed, stream::kPebVsX, i);
        const TrialEvaluator ev(p, draw_static(p, rng, UserPos2D{xs[i / R], std::nan("")}));
        const auto [a, m] = ev.adaptive_alpha();
        return std::array<Outcome, kS>{ev.comm_only(), ev.pos_only(), ev.joint_nominal(a, m), ev.robust(a, m),
                                       ev.upper_bound(a, m)};
    });
    Table t{"peb_vs_x", {"x_m", "scheme"}, {}};
    for (const auto& col : kStatsColumns) t.columns.push_back(col);
    t.columns.push_back("peb_reduction_vs_nominal_pct");
    for (std::size_t ix = 0; ix < xs.size(); ++ix) {
        std::array<Aggregate, kS> st;
        for (std::size_t j = 0; j < R; ++j)
            for (std::size_t s = 0; s < kS; ++s) st[s].add(outs[ix * R + j][s], p.th);
        for (std::size_t s = 0; s < kS; ++s) {
            std::vector<std::string> row{num(xs[ix]), names[s]};
            for (auto& cell : stats_cells(st[s])) row.push_back(cell);
            const double nom = st[2].avg_peb(), rob = st[3].avg_peb();
            row.push_back(s == 3 ? num(100.0 * (nom - rob) / nom) : "");
            t.rows.push_back(std::move(row));
        }
    }
    return {"peb_vs_x", {t}};
}

inline PresetResult preset_tradeoff_alpha(const ExperimentConfig& c, const RunOptions& opt = {}) {
    const Prepared p = prepare(c);
    const ModePolicy& pol = c.policy;
    struct AlphaPoint {
        double alpha;
        bool on_grid;
        const char* mark;
    };
    std::vector<AlphaPoint> alphas;
    for (int i = 0; i <= 20; ++i) alphas.push_back({i / 20.0, true, ""});
    const std::array<std::pair<double, const char*>, 3> marks{
        {{pol.alpha_p, "P"}, {pol.alpha_b, "B"}, {pol.alpha_c, "C"}}};
    for (const auto& [a, label] : marks) {
        auto it = std::find_if(alphas.begin(), alphas.end(), [&](const AlphaPoint& ap) { return ap.alpha == a; });
        if (it != alphas.end())
            it->mark = label;
        else
            alphas.push_back({a, false, label});
    }
    std::stable_sort(alphas.begin(), alphas.end(),
                     [](const AlphaPoint& x, const AlphaPoint& y) { return x.alpha < y.alpha; });

    const auto gx = cell_centres(c.region.x_min, c.region.x_max, c.trials.tradeoff_grid_x);
    const auto gy = cell_centres(c.region.y_min, c.region.y_max, c.trials.tradeoff_grid_y);
    const std::size_t R = c.trials.tradeoff_realizations;
    const std::size_t total = gx.size() * gy.size() * R;
    const std::size_t A = alphas.size();
    // per realization: comm, pos, then (robust, upper bound) per alpha
    const auto outs = parallel_map(total, opt.jobs, [&](std::size_t i) {
        const std::size_t loc = i / R;
        const UserPos2D u{gx[loc / gy.size()], gy[loc % gy.size()]};
        Rng rng = trial_rng(c.seed, stream::kTradeoff, i);
        const TrialEvaluator ev(p, draw_static(p, rng, u));
        std::vector<Outcome> o;
        o.reserve(2 + 2 * A);
        o.push_back(ev.comm_only());
        o.push_back(ev.pos_only());
        for (const auto& ap : alphas) {
            o.push_back(ev.robust(ap.alpha, Mode::B));
            o.push_back(ev.upper_bound(ap.alpha, Mode::B));
        }
        return o;
    });
    std::vector<Aggregate> st(2 + 2 * A);
    for (const auto& o : outs)
        for (std::size_t k = 0; k < o.size(); ++k) st[k].add(o[k], p.th);

    Table t{"tradeoff_alpha", {"alpha", "scheme", "on_grid", "marked_mode"}, {}};
    for (const auto& col : kStatsColumns) t.columns.push_back(col);
    auto push = [&](const std::string& alpha, const char* scheme, const std::string& on_grid, const char* mark,
                    const Aggregate& a) {
        std::vector<std::string> row{alpha, scheme, on_grid, mark};
        for (auto& cell : stats_cells(a)) row.push_back(cell);
        t.rows.push_back(std::move(row));
    };
    for (std::size_t k = 0; k < A; ++k) {
        const auto& ap = alphas[k];
        push(num(ap.alpha), "joint_robust", ap.on_grid ? "1" : "0", ap.mark, st[2 + 2 * k]);
        push(num(ap.alpha), "continuous_upper_bound", ap.on_grid ? "1" : "0", ap.mark, st[3 + 2 * k]);
    }
    push("", "comm_only", "0", "", st[0]);
    push("", "pos_only", "0", "", st[1]);
    return {"tradeoff_alpha", {t}};
}

inline PresetResult preset_switching(const ExperimentConfig& c, const RunOptions& opt = {}) {
    const Prepared p = prepare(c);
    Table t{"switching",
            {"rx_db2", "scheme", "trajectories", "switching_rate", "switching_rate_ci_low", "switching_rate_ci_high",
             "avg_snr_db", "avg_peb_m", "p_succ", "rate_diff_robust_minus_nominal", "rate_diff_se"},
            {}};
    for (double r_x : c.trials.switching_noise_grid) {
        const SwitchingSummary s = summarize_switching(simulate_switching(p, r_x, opt));
        const std::size_t n = c.trials.switching_trajectories;
        t.rows.push_back({num(r_x), "non_robust_joint", num(n), num(s.rate_nominal), num(s.ci_nominal.lo),
                          num(s.ci_nominal.hi), num(s.nominal.avg_snr_db()), num(s.nominal.avg_peb()),
                          num(s.nominal.p_succ()), "", ""});
        t.rows.push_back({num(r_x), "robust_joint", num(n), num(s.rate_robust), num(s.ci_robust.lo),
                          num(s.ci_robust.hi), num(s.robust.avg_snr_db()), num(s.robust.avg_peb()),
                          num(s.robust.p_succ()), num(s.diff_mean), num(s.diff_se)});
    }
    return {"switching", {t}};
}

inline std::vector<std::string> family_cells(const FamilyCounts& fc) {
    std::vector<std::string> cells;
    const std::size_t n = fc.trials;
    for (std::size_t k = 0; k < 3; ++k) cells.push_back(num(fc.count[k]));
    for (std::size_t k = 0; k < 3; ++k) {
        const Interval ci = wilson_interval(fc.count[k], n);
        cells.push_back(num(static_cast<double>(fc.count[k]) / static_cast<double>(n)));
        cells.push_back(num(ci.lo));
        cells.push_back(num(ci.hi));
    }
    const std::size_t top =
        static_cast<std::size_t>(std::max_element(fc.count.begin(), fc.count.end()) - fc.count.begin());
    cells.push_back(top == 0 ? "comm" : top == 1 ? "balanced" : "pos");
    return cells;
}

inline const std::vector<std::string> kFamilyColumns{
    "n_comm",       "n_balanced",        "n_pos",
    "p_comm",       "p_comm_ci_low",     "p_comm_ci_high",
    "p_balanced",   "p_balanced_ci_low", "p_balanced_ci_high",
    "p_pos",        "p_pos_ci_low",      "p_pos_ci_high",
    "dominant_family"};

inline PresetResult preset_family_vs_blockage(const ExperimentConfig& c, const RunOptions& opt = {}) {
    const Prepared p = prepare(c);
    Table t{"family_vs_blockage", {"xi", "mode", "alpha", "trials"}, {}};
    for (const auto& col : kFamilyColumns) t.columns.push_back(col);
    t.columns.push_back("avg_snr_db");
    t.columns.push_back("avg_peb_m");
    const auto& grid = c.trials.family_xi_grid;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const FamilyCounts fc = simulate_family(p, grid[i], i, opt);
        const auto [a, m] = select_alpha(grid[i], c.policy);
        std::vector<std::string> row{num(grid[i]), mode_name(m), num(a), num(fc.trials)};
        for (auto& cell : family_cells(fc)) row.push_back(cell);
        row.push_back(num(fc.stats.avg_snr_db()));
        row.push_back(num(fc.stats.avg_peb()));
        t.rows.push_back(std::move(row));
    }
    return {"family_vs_blockage", {t}};
}

inline PresetResult preset_decision_map(const ExperimentConfig& c, const RunOptions& opt = {}) {
    const Prepared p = prepare(c);
    const auto xs = linspace(c.region.x_min, c.region.x_max, c.trials.decision_x_points);
    const auto xis = linspace(c.xi_min, c.xi_max, c.trials.decision_xi_points);
    const std::size_t R = c.trials.decision_realizations;
    const auto outs = parallel_map(xs.size() * xis.size() * R, opt.jobs, [&](std::size_t i) {
        const std::size_t cell = i / R;
        Rng rng = trial_rng(c.seed, stream::kDecision, i);
        return TrialEvaluator(p, draw_static(p, rng, UserPos2D{xs[cell / xis.size()], std::nan("")},
                                             xis[cell % xis.size()]))
            .robust();
    });
    Table t{"decision_map", {"x_m", "xi", "mode", "alpha", "trials"}, {}};
    for (const auto& col : kFamilyColumns) t.columns.push_back(col);
    t.columns.push_back("avg_snr_db");
    t.columns.push_back("avg_peb_m");
    for (std::size_t cell = 0; cell < xs.size() * xis.size(); ++cell) {
        FamilyCounts fc;
        for (std::size_t j = 0; j < R; ++j) {
            const Outcome& o = outs[cell * R + j];
            ++fc.trials;
            if (!o.censored) ++fc.count[family_index(o.family)];
            fc.stats.add(o, p.th);
        }
        const double xi = xis[cell % xis.size()];
        const auto [a, m] = select_alpha(xi, c.policy);
        std::vector<std::string> row{num(xs[cell / xis.size()]), num(xi), mode_name(m), num(a), num(fc.trials)};
        for (auto& v : family_cells(fc)) row.push_back(v);
        row.push_back(num(fc.stats.avg_snr_db()));
        row.push_back(num(fc.stats.avg_peb()));
        t.rows.push_back(std::move(row));
    }
    return {"decision_map", {t}};
}

/// Proposed controller over the (N, b) grid. Trial j uses the same draws in every cell.
inline PresetResult preset_psucc_surface(const ExperimentConfig& c, const RunOptions& opt = {}) {
    Table t{"psucc_surface", {"n_elements", "rows", "cols", "bits"}, {}};
    for (const auto& col : kStatsColumns) t.columns.push_back(col);
    for (std::size_t N : c.trials.psucc_n_grid) {
        for (unsigned b : c.trials.psucc_b_grid) {
            const Prepared p = prepare(c, N, b);
            const auto outs = parallel_map(c.trials.psucc_trials, opt.jobs, [&](std::size_t j) {
                Rng rng = trial_rng(c.seed, stream::kPsucc, j);
                return TrialEvaluator(p, draw_static(p, rng)).robust();
            });
            Aggregate st;
            for (const auto& o : outs) st.add(o, p.th);
            std::vector<std::string> row{num(N), num(p.sc.ris_spec.rows), num(p.sc.ris_spec.cols),
                                         num(static_cast<std::size_t>(b))};
            for (auto& cell : stats_cells(st)) row.push_back(cell);
            t.rows.push_back(std::move(row));
        }
    }
    return {"psucc_surface", {t}};
}

inline PresetResult preset_spatial_maps(const ExperimentConfig& c, const RunOptions& opt = {}) {
    const Prepared p = prepare(c);
    const auto xs = linspace(c.region.x_min, c.region.x_max, c.trials.spatial_nx);
    const auto ys = linspace(c.region.y_min, c.region.y_max, c.trials.spatial_ny);
    const std::size_t R = c.trials.spatial_realizations;
    const auto outs = parallel_map(xs.size() * ys.size() * R, opt.jobs, [&](std::size_t i) {
        const std::size_t cell = i / R;
        Rng rng = trial_rng(c.seed, stream::kSpatial, i);
        return TrialEvaluator(p, draw_static(p, rng, UserPos2D{xs[cell / ys.size()], ys[cell % ys.size()]})).robust();
    });
    Table t{"spatial_maps", {"x_m", "y_m"}, {}};
    for (const auto& col : kStatsColumns) t.columns.push_back(col);
    for (std::size_t cell = 0; cell < xs.size() * ys.size(); ++cell) {
        Aggregate st;
        for (std::size_t j = 0; j < R; ++j) st.add(outs[cell * R + j], p.th);
        std::vector<std::string> row{num(xs[cell / ys.size()]), num(ys[cell % ys.size()])};
        for (auto& v : stats_cells(st)) row.push_back(v);
        t.rows.push_back(std::move(row));
    }
    return {"spatial_maps", {t}};
}

inline PresetResult preset_summary_tables(const ExperimentConfig& c, const RunOptions& opt = {}) {
    const Prepared p = prepare(c);
    const auto trials = simulate_summary(p, opt);
    std::array<Aggregate, kSummarySchemes> st;
    for (const auto& tr : trials)
        for (std::size_t s = 0; s < kSummarySchemes; ++s) st[s].add(tr[s], p.th);
    Table t2{"summary_default", {"scheme"}, {}};
    for (const auto& col : kStatsColumns) t2.columns.push_back(col);
    for (std::size_t s = 0; s < kSummarySchemes; ++s) {
        std::vector<std::string> row{kSummaryNames[s]};
        for (auto& v : stats_cells(st[s])) row.push_back(v);
        t2.rows.push_back(std::move(row));
    }

    const SwitchingSummary sw = summarize_switching(simulate_switching(p, c.meas_noise_var_db2, opt));
    Table t3{"summary_switching",
             {"scheme", "rx_db2", "trajectories", "switching_rate", "switching_rate_ci_low", "switching_rate_ci_high",
              "avg_snr_db", "avg_peb_m", "snr_delta_vs_non_robust_db", "peb_delta_vs_non_robust_pct"},
             {}};
    const std::size_t n = c.trials.switching_trajectories;
    t3.rows.push_back({"non_robust_joint", num(c.meas_noise_var_db2), num(n), num(sw.rate_nominal),
                       num(sw.ci_nominal.lo), num(sw.ci_nominal.hi), num(sw.nominal.avg_snr_db()),
                       num(sw.nominal.avg_peb()), num(0.0), num(0.0)});
    t3.rows.push_back({"robust_joint", num(c.meas_noise_var_db2), num(n), num(sw.rate_robust), num(sw.ci_robust.lo),
                       num(sw.ci_robust.hi), num(sw.robust.avg_snr_db()), num(sw.robust.avg_peb()),
                       num(sw.robust.avg_snr_db() - sw.nominal.avg_snr_db()),
                       num(100.0 * (sw.robust.avg_peb() - sw.nominal.avg_peb()) / sw.nominal.avg_peb())});
    return {"summary_tables", {t2, t3}};
}

// =============================================================================
// Registry and output
// =============================================================================

using PresetFn = PresetResult (*)(const ExperimentConfig&, const RunOptions&);

struct PresetEntry {
    const char* name;
    PresetFn fn;
};

inline const std::array<PresetEntry, 8>& presets() {
    static const std::array<PresetEntry, 8> r{{
        {"peb_vs_x", &preset_peb_vs_x},
        {"tradeoff_alpha", &preset_tradeoff_alpha},
        {"switching", &preset_switching},
        {"family_vs_blockage", &preset_family_vs_blockage},
        {"decision_map", &preset_decision_map},
        {"psucc_surface", &preset_psucc_surface},
        {"spatial_maps", &preset_spatial_maps},
        {"summary_tables", &preset_summary_tables},
    }};
    return r;
}

/// Writes one CSV per table and a <preset>.json sidecar with the config and seed. Returns written paths.
inline std::vector<std::string> write_preset(const PresetResult& r, const ExperimentConfig& c,
                                             const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> written;
    nlohmann::json side;
    side["preset"] = r.preset;
    side["seed"] = c.seed;
    side["config"] = config_to_json(c);
    side["thresholds"] = {{"snr_db", c.snr_threshold_db}, {"peb_m", c.peb_threshold_m}};
    side["files"] = nlohmann::json::array();
    for (const auto& t : r.tables) {
        const auto path = dir / (t.name + ".csv");
        std::ofstream os(path, std::ios::binary);
        if (!os) throw InvalidConfig("cannot write " + path.string());
        os << t.to_csv();
        written.push_back(path.string());
        side["files"].push_back({{"table", t.name}, {"csv", path.filename().string()}, {"columns", t.columns}});
    }
    const auto spath = dir / (r.preset + ".json");
    std::ofstream os(spath, std::ios::binary);
    if (!os) throw InvalidConfig("cannot write " + spath.string());
    os << side.dump(2) << '\n';
    written.push_back(spath.string());
    return written;
}

} // namespace risntn
