#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "risntn/channel.hpp"
#include "test_support.hpp"

using namespace risntn;

namespace {
const LinkBudget kBudget = link_budget(31.0, 20e6, 7.0, 2.2e9);
const ScenarioGeometry kGeom{{350000, 0, 600000}, {100, 0, 20}, {55, 15}, 1.5};

std::vector<double> random_phases(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
    std::vector<double> p(n);
    for (auto& v : p) v = u(rng);
    return p;
}
} // namespace

TEST(Channel, FsplFrozenValue) {
    EXPECT_NEAR(fspl_db(63.58, 2.2e9), 75.356636274067883, 1e-9);
}

TEST(Channel, FsplUnitArgumentAndDoubling) {
    EXPECT_NEAR(fspl_db(3e8 / (4 * kPi * 2.2e9), 2.2e9), 0.0, 1e-12);
    EXPECT_NEAR(fspl_db(200.0, 2.2e9) - fspl_db(100.0, 2.2e9), 20.0 * std::log10(2.0), 1e-12);
    EXPECT_THROW(fspl_db(0.0, 2.2e9), InvalidInput);
    EXPECT_THROW(fspl_db(10.0, -1.0), InvalidInput);
}

TEST(Channel, LinkBudgetTableValues) {
    const LinkBudget b = link_budget(31.0, 20e6, 7.0);
    EXPECT_NEAR(linear_to_db(b.tx_power), 44.010299956639812, 1e-9);
    EXPECT_NEAR(linear_to_db(b.noise_power), -123.98970004336019, 1e-9);
    EXPECT_NEAR(linear_to_db(link_budget(0.0, 1e6, 0.0).tx_power), 0.0, 1e-12);
    EXPECT_NEAR(link_budget(31.0, 20e6, 10.0).noise_power / link_budget(31.0, 20e6, 7.0).noise_power,
                std::pow(10.0, 0.3), 1e-12);
    EXPECT_THROW(link_budget(31.0, 0.0, 7.0), InvalidInput);
}

TEST(Channel, DirectGainChain) {
    LargeScaleParams p{0.0, 0.0, 0.0, 0.0, 0.0, 1.0};
    const double fspl = fspl_db(distances(kGeom).d_su, 2.2e9);
    EXPECT_NEAR(direct_gain(kGeom, kBudget, p) / std::pow(10.0, -fspl / 10.0), 1.0, 1e-12);
    LargeScaleParams blocked = p;
    blocked.blockage = 0.01;
    EXPECT_NEAR(direct_gain(kGeom, kBudget, blocked) / direct_gain(kGeom, kBudget, p), 0.01, 1e-14);
    LargeScaleParams atm = p;
    atm.atm_su_db = 1.0;
    EXPECT_NEAR(direct_gain(kGeom, kBudget, atm) / direct_gain(kGeom, kBudget, p), std::pow(10.0, -0.1), 1e-14);
    blocked.blockage = 0.0;
    EXPECT_THROW(direct_gain(kGeom, kBudget, blocked), InvalidInput);
}

TEST(Channel, ReflectedGainChains) {
    const double f_ru = fspl_db(distances(kGeom).d_ru, 2.2e9);
    EXPECT_NEAR(ru_gain(kGeom, kBudget, 0.0) / std::pow(10.0, -f_ru / 10.0), 1.0, 1e-12);
    EXPECT_NEAR(ru_gain(kGeom, kBudget, 6.0) / ru_gain(kGeom, kBudget, 0.0), std::pow(10.0, -0.6), 1e-14);
    LargeScaleParams p{};
    p.atm_sr_db = 0.8;
    LargeScaleParams q = p;
    q.atm_sr_db = 0.0;
    EXPECT_NEAR(sr_gain(kGeom, kBudget, p) / sr_gain(kGeom, kBudget, q), std::pow(10.0, -0.08), 1e-14);
}

TEST(Channel, DbRoundTrip) {
    for (double db : {-150.0, -75.3, 0.0, 12.5, 44.01})
        EXPECT_NEAR(linear_to_db(db_to_linear(db)), db, 1e-9);
}

TEST(Channel, ArrayResponseBroadsideAndSymmetry) {
    const RISSpec s = RISSpec::square(64);
    for (const auto& a : array_response(s, s.normal)) EXPECT_NEAR(std::abs(a - cplx(1.0, 0.0)), 0.0, 1e-15);
    const Vec3 d = unit(Vec3{0.3, 0.5, 0.8});
    const auto ap = array_response(s, d);
    const auto am = array_response(s, -1.0 * d);
    for (std::size_t n = 0; n < ap.size(); ++n) {
        EXPECT_NEAR(std::abs(ap[n]), 1.0, 1e-14);
        EXPECT_NEAR(std::abs(am[n] - std::conj(ap[n])), 0.0, 1e-14);
    }
    const auto one = array_response(RISSpec::square(1), d);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_NEAR(std::abs(one[0] - cplx(1.0, 0.0)), 0.0, 1e-15);
    EXPECT_THROW(array_response(s, Vec3{1, 1, 0}), InvalidInput);
}

TEST(Channel, ArrayResponseMatchesElementPositions) {
    RISSpec s = RISSpec::square(12);
    ASSERT_EQ(s.rows * s.cols, 12u);
    const Vec3 d = unit(Vec3{-0.2, 0.7, 0.4});
    const auto a = array_response(s, d);
    for (std::size_t r = 0; r < s.rows; ++r)
        for (std::size_t c = 0; c < s.cols; ++c) {
            const double pu = (static_cast<double>(c) - 0.5 * (s.cols - 1)) * 0.5;
            const double pv = (static_cast<double>(r) - 0.5 * (s.rows - 1)) * 0.5;
            const Vec3 pos = pu * s.axis_u + pv * s.axis_v; // in wavelengths
            EXPECT_NEAR(std::abs(a[r * s.cols + c] - std::polar(1.0, 2 * kPi * dot(pos, d))), 0.0, 1e-12);
        }
}

TEST(Channel, SquareFactorisation) {
    EXPECT_EQ(RISSpec::square(256).rows, 16u);
    EXPECT_EQ(RISSpec::square(512).rows, 16u);
    EXPECT_EQ(RISSpec::square(512).cols, 32u);
    EXPECT_EQ(RISSpec::square(7).rows, 1u);
    EXPECT_NO_THROW(RISSpec::square(1024).validate());
}

TEST(Channel, SingleElementReflectedChannel) {
    const RISSpec s = RISSpec::square(1);
    LargeScaleParams p{};
    const cplx hr = reflected_channel(kGeom, s, {{0.0}}, kBudget, p);
    const Distances d = distances(kGeom);
    const double amp = std::sqrt(sr_gain(kGeom, kBudget, p) * ru_gain(kGeom, kBudget, 0.0));
    const double lambda = kBudget.wavelength();
    const cplx expect = amp * std::polar(1.0, -2 * kPi * std::fmod((d.d_sr + d.d_ru) / lambda, 1.0));
    EXPECT_NEAR(std::abs(hr - expect) / amp, 0.0, 1e-6);
}

TEST(Channel, CoPhasedConfigReachesCoherentBound) {
    const RISSpec s = RISSpec::square(256);
    LargeScaleParams p{};
    const auto t = reflected_terms(kGeom, s, kBudget);
    RISConfig cfg;
    for (const auto& v : t) cfg.phases.push_back(-std::arg(v));
    const double bound = 256 * std::sqrt(sr_gain(kGeom, kBudget, p) * ru_gain(kGeom, kBudget, 0.0));
    EXPECT_NEAR(std::abs(reflected_channel(kGeom, s, cfg, kBudget, p)) / bound, 1.0, 1e-12);
}

TEST(Channel, ReflectedMagnitudeBoundAndSnrEnvelope) {
    std::mt19937_64 rng(4);
    const RISSpec s = RISSpec::square(64);
    for (int i = 0; i < 300; ++i) {
        auto g = testing_support::random_geometry(rng);
        LargeScaleParams p{};
        p.shadow_ru_db = 5.0;
        const RISConfig cfg{random_phases(64, rng)};
        const ChannelRealization ch = realize_channel(g, s, cfg, kBudget, p);
        EXPECT_LE(std::abs(ch.h_r), 64 * std::sqrt(ch.beta_sr * ch.beta_ru) * (1 + 1e-12));
        EXPECT_NEAR(std::norm(ch.h_d) / ch.beta_su, 1.0, 1e-12);
        const double gd = gamma_d(ch.h_d, kBudget), gr = gamma_r(ch.h_r, kBudget), gm = snr(ch.h_d, ch.h_r, kBudget);
        EXPECT_LE(gm, std::pow(std::sqrt(gd) + std::sqrt(gr), 2) * (1 + 1e-9));
        EXPECT_GE(gm, std::pow(std::sqrt(gd) - std::sqrt(gr), 2) * (1 - 1e-9) - 1e-300);
    }
}

TEST(Channel, SnrSpecialCases) {
    const cplx hd(3e-8, -1e-8);
    EXPECT_DOUBLE_EQ(snr(hd, 0.0, kBudget), gamma_d(hd, kBudget));
    EXPECT_DOUBLE_EQ(snr(hd, -hd, kBudget), 0.0);
    const cplx hr = 0.25 * hd;
    EXPECT_NEAR(snr(hd, hr, kBudget) / (kBudget.snr_scale() * std::pow(std::abs(hd) + std::abs(hr), 2)), 1.0, 1e-14);
}
