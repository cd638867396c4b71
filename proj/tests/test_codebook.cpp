#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "risntn/codebook.hpp"

using namespace risntn;

namespace {
Scenario small_scenario(std::size_t n) {
    Scenario sc;
    sc.ris_spec = RISSpec::square(n);
    return sc;
}

std::vector<double> random_lattice(std::size_t n, unsigned b, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> u(0, (std::size_t{1} << b) - 1);
    std::vector<double> p(n);
    for (auto& v : p) v = static_cast<double>(u(rng)) * PhaseSet{b}.step();
    return p;
}

cplx array_sum(const std::vector<cplx>& t, const std::vector<double>& phases) {
    cplx s{0.0, 0.0};
    for (std::size_t n = 0; n < t.size(); ++n) s += t[n] * std::polar(1.0, phases[n]);
    return s;
}
} // namespace

TEST(Codebook, QuantizeExamples) {
    EXPECT_DOUBLE_EQ(quantize_phase(2.0, 1), kPi);
    EXPECT_DOUBLE_EQ(quantize_phase(kPi / 4, 2), 0.0);
    EXPECT_DOUBLE_EQ(quantize_phase(-0.1, 3), 0.0);
    EXPECT_DOUBLE_EQ(quantize_phase(2 * kPi - 0.1, 3), 0.0);
    for (std::size_t k = 0; k < 64; ++k) {
        const double v = static_cast<double>(k) * PhaseSet{6}.step();
        EXPECT_DOUBLE_EQ(quantize_phase(v, 6), v);
    }
    EXPECT_THROW(quantize_phase(1.0, 0), InvalidInput);
}

TEST(Codebook, QuantizeErrorBound) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    for (unsigned b = 1; b <= 6; ++b)
        for (int i = 0; i < 2000; ++i) {
            const double phi = u(rng);
            const double q = quantize_phase(phi, b);
            EXPECT_GE(q, 0.0);
            EXPECT_LT(q, 2 * kPi);
            const double err = std::abs(std::arg(std::polar(1.0, phi - q)));
            EXPECT_LE(err, 0.5 * PhaseSet{b}.step() + 1e-12);
        }
}

TEST(Codebook, PhaseSetValues) {
    const auto v = PhaseSet{2}.values();
    ASSERT_EQ(v.size(), 4u);
    EXPECT_DOUBLE_EQ(v[1], kPi / 2);
    EXPECT_DOUBLE_EQ(v[3], 3 * kPi / 2);
}

TEST(Codebook, CommCodewordBeatsRandomCodewords) {
    const Scenario sc = small_scenario(64);
    const auto g = sc.geometry({55.0, 14.0});
    const auto p = sc.params(0.3, 0.0);
    const Codeword cw = comm_codeword(g, sc.ris_spec, sc.budget, p, 3);
    const double best = snr(direct_channel(g, sc.budget, p), reflected_channel(g, sc.ris_spec, cw.config, sc.budget, p),
                            sc.budget);
    std::mt19937_64 rng(12);
    for (int i = 0; i < 200; ++i) {
        const RISConfig r{random_lattice(64, 3, rng)};
        EXPECT_GE(best, snr(direct_channel(g, sc.budget, p), reflected_channel(g, sc.ris_spec, r, sc.budget, p),
                            sc.budget));
    }
}

TEST(Codebook, PosCodewordBeatsRandomCodewords) {
    const Scenario sc = small_scenario(64);
    const auto g = sc.geometry({70.0, 16.0});
    const auto t = reflected_terms(g, sc.ris_spec, sc.budget);
    const Codeword cw = pos_codeword(g, sc.ris_spec, sc.budget, 2);
    EXPECT_EQ(cw.family, Family::Pos);
    const double best = std::abs(array_sum(t, cw.config.phases));
    EXPECT_GE(best, 64 * std::cos(kPi / 4));
    std::mt19937_64 rng(13);
    for (int i = 0; i < 200; ++i) EXPECT_GE(best, std::abs(array_sum(t, random_lattice(64, 2, rng))));
}

TEST(Codebook, ContinuousAlignmentsDifferByRotation) {
    const Scenario sc = small_scenario(16);
    const auto t = reflected_terms(sc.geometry({45.0, 13.0}), sc.ris_spec, sc.budget);
    const auto a = alignment_phases(t, 0.7);
    const auto b = alignment_phases(t, -1.9);
    for (std::size_t n = 0; n < t.size(); ++n)
        EXPECT_NEAR(std::abs(std::polar(1.0, a[n] - b[n]) - std::polar(1.0, 2.6)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(array_sum(t, a)), 16.0, 1e-12);
}

TEST(Codebook, SingleElement) {
    const Scenario sc = small_scenario(1);
    const auto g = sc.geometry({60.0, 15.0});
    const auto p = sc.params(1.0, 0.0);
    const Codeword c = comm_codeword(g, sc.ris_spec, sc.budget, p, 3);
    ASSERT_EQ(c.config.phases.size(), 1u);
    const auto t = reflected_terms(g, sc.ris_spec, sc.budget);
    const double want = quantize_phase(std::arg(direct_channel(g, sc.budget, p)) - std::arg(t[0]), 3);
    EXPECT_DOUBLE_EQ(c.config.phases[0], want);
    EXPECT_EQ(pos_codeword(g, sc.ris_spec, sc.budget, 3).config.phases.size(), 1u);
}

TEST(Codebook, BuildStructure) {
    const Scenario sc = small_scenario(64);
    const auto anchors = default_anchors(40, 80, 12, 18, 3);
    EXPECT_DOUBLE_EQ(anchors[0].x, 40.0 + 40.0 / 6.0);
    EXPECT_DOUBLE_EQ(anchors[1].x, 60.0);
    EXPECT_DOUBLE_EQ(anchors[2].y, 15.0);
    const Codebook cb = build_codebook(sc, 3, 9, anchors);
    ASSERT_EQ(cb.size(), 9u);
    EXPECT_NO_THROW(cb.validate());
    const Family order[3] = {Family::Comm, Family::Pos, Family::Balanced};
    for (std::size_t m = 0; m < 9; ++m) {
        EXPECT_EQ(cb.codewords[m].id, m);
        EXPECT_EQ(cb.codewords[m].family, order[m % 3]);
    }
    const Codebook again = build_codebook(sc, 3, 9, anchors);
    for (std::size_t m = 0; m < 9; ++m) EXPECT_EQ(cb.codewords[m].config.phases, again.codewords[m].config.phases);
    EXPECT_THROW(build_codebook(sc, 3, 10, anchors), InvalidConfig);
    EXPECT_THROW(build_codebook(sc, 3, 6, anchors), InvalidConfig);
}

TEST(Codebook, ValidateRejectsOffLattice) {
    const Scenario sc = small_scenario(16);
    Codebook cb = build_codebook(sc, 2, 3, {{60.0, 15.0}});
    cb.codewords[1].config.phases[0] = 0.1;
    EXPECT_THROW(cb.validate(), InvalidConfig);
    cb = build_codebook(sc, 2, 3, {{60.0, 15.0}});
    cb.codewords[2].id = 7;
    EXPECT_THROW(cb.validate(), InvalidConfig);
}

TEST(Codebook, JsonRoundTrip) {
    const Scenario sc = small_scenario(64);
    const Codebook cb = build_codebook(sc, 4, 6, default_anchors(40, 80, 12, 18, 2));
    const Codebook back = codebook_from_json(nlohmann::json::parse(codebook_to_json(cb).dump()));
    EXPECT_EQ(back.n_elements, cb.n_elements);
    EXPECT_EQ(back.bits, cb.bits);
    ASSERT_EQ(back.size(), cb.size());
    for (std::size_t m = 0; m < cb.size(); ++m) {
        EXPECT_EQ(back.codewords[m].family, cb.codewords[m].family);
        EXPECT_EQ(back.codewords[m].config.phases, cb.codewords[m].config.phases);
    }
    EXPECT_THROW(codebook_from_json(nlohmann::json::parse(R"({"N": 2})")), InvalidConfig);
    EXPECT_THROW(family_from_name("beam"), InvalidInput);
}
