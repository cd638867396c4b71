// Scores the default codebook for one user and prints the choice of each rule.

#include <cstdio>

#include "risntn/controller.hpp"
#include "risntn/experiments.hpp"

int main() {
    using namespace risntn;
    const Prepared p = prepare(ExperimentConfig{});

    Realization r;
    r.user = {55.0, 15.0};
    r.xi = 0.05;
    r.x_true = 3.0;
    r.x_meas = 2.0;
    r.tracker = kf_step(ShadowTracker::stationary_prior(p.shadow), 1.0, r.x_meas, {0.0, 4.0});
    r.x_wc = worst_case_shadow(r.tracker, 1.2);

    const TrialEvaluator ev(p, r);
    auto show = [](const char* name, const Outcome& o) {
        std::printf("%-14s id=%zu family=%-8s snr=%6.2f dB  peb=%7.2f m\n", name, o.id, family_name(o.family),
                    linear_to_db(o.gamma), o.peb);
    };
    show("comm-only", ev.comm_only());
    show("pos-only", ev.pos_only());
    show("nominal", ev.joint_nominal());
    show("robust", ev.robust());
    const Outcome ub = ev.upper_bound(select_alpha(r.xi, p.cfg.policy).first, Mode::P);
    std::printf("%-14s snr=%6.2f dB  peb=%7.2f m\n", "continuous", linear_to_db(ub.gamma), ub.peb);
}
