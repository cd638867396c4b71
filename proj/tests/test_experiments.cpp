#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "risntn/experiments.hpp"

using namespace risntn;

namespace {
ExperimentConfig small_config() {
    ExperimentConfig c;
    c.n_elements = 64;
    TrialCounts& t = c.trials;
    t.summary = 60;
    t.tradeoff_realizations = 4;
    t.tradeoff_grid_x = 2;
    t.tradeoff_grid_y = 1;
    t.switching_trajectories = 6;
    t.switching_blocks = 12;
    t.switching_noise_grid = {1.0, 100.0};
    t.family_trials = 20;
    t.family_xi_grid = {0.05, 0.5};
    t.decision_x_points = 3;
    t.decision_xi_points = 3;
    t.decision_realizations = 2;
    t.psucc_trials = 20;
    t.psucc_n_grid = {64, 128};
    t.psucc_b_grid = {1, 2, 3};
    t.spatial_nx = 3;
    t.spatial_ny = 2;
    t.spatial_realizations = 2;
    t.peb_x_points = 3;
    t.peb_x_realizations = 4;
    return c;
}

std::string csv_of(const PresetResult& r) {
    std::string s;
    for (const auto& t : r.tables) s += t.name + "\n" + t.to_csv();
    return s;
}
} // namespace

TEST(Experiments, SuccessIndicatorExamples) {
    EXPECT_TRUE(success_indicator(7.0, 17.0, 6.0, 18.0));
    EXPECT_TRUE(success_indicator(6.0, 18.0, 6.0, 18.0));
    EXPECT_FALSE(success_indicator(5.9, 17.0, 6.0, 18.0));
    EXPECT_FALSE(success_indicator(9.0, 18.1, 6.0, 18.0));
}

TEST(Experiments, SwitchingRateExamples) {
    EXPECT_DOUBLE_EQ(switching_rate({1, 1, 2, 2, 3}), 0.5);
    EXPECT_DOUBLE_EQ(switching_rate({4, 4, 4, 4}), 0.0);
    EXPECT_DOUBLE_EQ(switching_rate({0, 1, 0, 1, 0}), 1.0);
    EXPECT_THROW(switching_rate({2}), InvalidInput);
    EXPECT_THROW(switching_rate({}), InvalidInput);
}

TEST(Experiments, WilsonInterval) {
    const Interval a = wilson_interval(50, 100);
    EXPECT_NEAR(a.lo, 0.40383153036599560, 1e-12);
    EXPECT_NEAR(a.hi, 0.59616846963400440, 1e-12);
    const Interval z = wilson_interval(0, 40);
    EXPECT_DOUBLE_EQ(z.lo, 0.0);
    EXPECT_GT(z.hi, 0.0);
    const Interval o = wilson_interval(40, 40);
    EXPECT_DOUBLE_EQ(o.hi, 1.0);
    EXPECT_DOUBLE_EQ(wilson_interval(0, 100).lo, 0.0);
    EXPECT_LT(o.lo, 1.0);
}

TEST(Experiments, AggregateCensoring) {
    Aggregate a;
    const Thresholds th{6.0, 18.0};
    Outcome ok;
    ok.gamma = db_to_linear(10.0);
    ok.peb = 5.0;
    ok.peb_valid = true;
    Outcome invalid = ok;
    invalid.peb_valid = false;
    Outcome failed;
    failed.censored = true;
    a.add(ok, th);
    a.add(invalid, th);
    a.add(failed, th);
    EXPECT_EQ(a.n, 3u);
    EXPECT_EQ(a.censored, 2u);
    EXPECT_EQ(a.successes, 1u);
    EXPECT_NEAR(a.p_succ(), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(a.avg_snr_db(), 10.0, 1e-12);
    EXPECT_DOUBLE_EQ(a.avg_peb(), 5.0);
}

TEST(Experiments, SeedDerivation) {
    EXPECT_EQ(derive_seed(1, 2, 3), derive_seed(1, 2, 3));
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 4; ++s)
        for (std::uint64_t i = 0; i < 256; ++i) seen.insert(derive_seed(7, s, i));
    EXPECT_EQ(seen.size(), 4u * 256u);
}

TEST(Experiments, ParallelMapKeepsOrder) {
    const auto v = parallel_map(1000, 4, [](std::size_t i) { return i * i; });
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], i * i);
    EXPECT_THROW(parallel_map(10, 3, [](std::size_t i) -> int { if (i == 7) throw InvalidInput("x"); return 0; }),
                 InvalidInput);
}

TEST(Experiments, NumberFormatting) {
    EXPECT_EQ(num(0.1), "0.1");
    EXPECT_EQ(num(std::nan("")), "");
    EXPECT_EQ(num(std::size_t{42}), "42");
}

TEST(Experiments, StaticDrawRespectsRanges) {
    const Prepared p = prepare(small_config());
    Rng rng(3);
    for (int i = 0; i < 500; ++i) {
        const Realization r = draw_static(p, rng);
        EXPECT_GE(r.user.x, 40.0);
        EXPECT_LE(r.user.x, 80.0);
        EXPECT_GE(r.user.y, 12.0);
        EXPECT_LE(r.user.y, 18.0);
        EXPECT_GT(r.xi, 0.0);
        EXPECT_LE(r.xi, 1.0);
        EXPECT_NEAR(r.x_wc, r.tracker.estimate + 1.2 * std::sqrt(r.tracker.variance), 1e-12);
        EXPECT_NEAR(r.tracker.variance, 36.0 * 4.0 / 40.0, 1e-12);
    }
}

TEST(Experiments, SummaryOrderingWithinTrial) {
    const Prepared p = prepare(small_config());
    for (const auto& t : simulate_summary(p, {2})) {
        const auto& ub = t[kUpperBound];
        for (std::size_t s = 0; s < kUpperBound; ++s)
            if (!t[s].censored) EXPECT_GE(ub.gamma, t[s].gamma * (1 - 1e-12));
        EXPECT_GE(t[kCommOnly].gamma, t[kJointAlphaC].gamma * (1 - 1e-12));
        if (t[kPosOnly].peb_valid && t[kJointAlphaP].peb_valid)
            EXPECT_LE(t[kPosOnly].peb, t[kJointAlphaP].peb * (1 + 1e-12));
    }
}

TEST(Experiments, PresetsAreDeterministicAcrossJobCounts) {
    const ExperimentConfig c = small_config();
    for (const auto& e : presets()) {
        const std::string a = csv_of(e.fn(c, {1}));
        const std::string b = csv_of(e.fn(c, {3}));
        EXPECT_EQ(a, b) << e.name;
    }
}

TEST(Experiments, PsuccSurfaceShape) {
    ExperimentConfig c = small_config();
    c.trials.psucc_n_grid = {64, 128, 256, 512, 1024};
    c.trials.psucc_b_grid = {1, 2, 3, 4, 5, 6};
    c.trials.psucc_trials = 2;
    const PresetResult r = preset_psucc_surface(c);
    ASSERT_EQ(r.tables.size(), 1u);
    EXPECT_EQ(r.tables[0].rows.size(), 30u);
    const auto& row = r.tables[0].rows[4 * 6 + 2];
    EXPECT_EQ(row[0], "1024");
    EXPECT_EQ(row[1], "32");
    EXPECT_EQ(row[3], "3");
}

TEST(Experiments, TradeoffMarksOperatingPoints) {
    const PresetResult r = preset_tradeoff_alpha(small_config());
    const Table& t = r.tables[0];
    const auto ia = t.column("alpha"), is = t.column("scheme"), ig = t.column("on_grid"), im = t.column("marked_mode");
    std::size_t on_grid = 0;
    std::map<std::string, std::string> marks;
    for (const auto& row : t.rows) {
        if (row[is] != "joint_robust") continue;
        on_grid += row[ig] == "1";
        if (!row[im].empty()) marks[row[im]] = row[ia];
    }
    EXPECT_EQ(on_grid, 21u);
    EXPECT_EQ(marks["P"], "0.15");
    EXPECT_EQ(marks["B"], "0.55");
    EXPECT_EQ(marks["C"], "0.92");
}

TEST(Experiments, SwitchingTrajectoryRates) {
    const Prepared p = prepare(small_config());
    const TrajectoryResult r = simulate_trajectory(p, 4.0, 0);
    EXPECT_GE(r.rate_robust, 0.0);
    EXPECT_LE(r.rate_robust, 1.0);
    EXPECT_EQ(r.robust.n, 12u);
    const TrajectoryResult again = simulate_trajectory(p, 4.0, 0);
    EXPECT_EQ(r.rate_nominal, again.rate_nominal);
}

TEST(Experiments, WritePresetSidecar) {
    const ExperimentConfig c = small_config();
    const auto dir = std::filesystem::temp_directory_path() / "risntn_write_preset";
    std::filesystem::remove_all(dir);
    const auto files = write_preset(preset_spatial_maps(c), c, dir);
    ASSERT_FALSE(files.empty());
    std::ifstream is(dir / "spatial_maps.json");
    const auto side = nlohmann::json::parse(is);
    EXPECT_EQ(side.at("seed").get<std::uint64_t>(), c.seed);
    EXPECT_EQ(parse_config(side.at("config").dump()), c);
    for (const auto& f : side.at("files")) EXPECT_TRUE(std::filesystem::exists(dir / f.at("csv").get<std::string>()));
    std::filesystem::remove_all(dir);
}
