// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "channel.hpp"
#include "errors.hpp"
#include "link.hpp"

namespace risntn {

enum class Family { Comm, Balanced, Pos };

inline const char* family_name(Family f) {
    switch (f) {
    case Family::Comm: return "comm";
    case Family::Balanced: return "balanced";
    case Family::Pos: return "pos";
    }
    return "?";
}

inline Family family_from_name(const std::string& s) {
    if (s == "comm") return Family::Comm;
    if (s == "balanced") return Family::Balanced;
    if (s == "pos") return Family::Pos;
    throw InvalidInput("unknown codeword family '" + s + "'");
}

inline double wrap_phase(double phi) {
    double w = std::fmod(phi, 2.0 * kPi);
    if (w < 0.0) w += 2.0 * kPi;
    return w;
}

struct PhaseSet {
    unsigned bits = 1;

    std::size_t size() const { return std::size_t{1} << bits; }
    double step() const { return 2.0 * kPi / static_cast<double>(size()); }
    std::vector<double> values() const {
        std::vector<double> v(size());
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = static_cast<double>(k) * step();
        return v;
    }
};

/// Level index of the nearest F_b element; exact ties go to the lower neighbour.
inline std::size_t quantize_level(double phi, unsigned b) {
    if (b < 1 || b > 30) throw InvalidInput("phase resolution must be between 1 and 30 bits");
    const PhaseSet ps{b};
    const double x = wrap_phase(phi) / ps.step();
    const auto k = static_cast<long long>(std::ceil(x - 0.5));
    return static_cast<std::size_t>(k) % ps.size();
}

inline double quantize_phase(double phi, unsigned b) {
    return static_cast<double>(quantize_level(phi, b)) * PhaseSet{b}.step();
}

struct Codeword {
    RISConfig config;
    Family family = Family::Comm;
    std::size_t id = 0;
};

struct Codebook {
    std::size_t n_elements = 0;
    unsigned bits = 1;
    std::vector<Codeword> codewords;

    std::size_t size() const { return codewords.size(); }

    void validate() const {
        if (codewords.empty()) throw InvalidConfig("codebook is empty");
        const double step = PhaseSet{bits}.step();
        for (std::size_t m = 0; m < codewords.size(); ++m) {
            const auto& cw = codewords[m];
            if (cw.id != m) throw InvalidConfig("codeword ids must be 0..M-1 in order");
            if (cw.config.phases.size() != n_elements) throw InvalidConfig("codeword length differs from N");
            for (double p : cw.config.phases) {
                const double k = p / step;
                if (!(p >= 0.0 && p < 2.0 * kPi) || std::abs(k - std::round(k)) > 1e-9)
                    throw InvalidConfig("codeword phase outside the b-bit phase set");
            }
        }
    }
};

inline std::vector<cplx> phase_weights(const std::vector<double>& phases) {
    std::vector<cplx> w(phases.size());
    for (std::size_t n = 0; n < phases.size(); ++n) w[n] = std::polar(1.0, phases[n]);
    return w;
}

inline std::vector<std::vector<cplx>> codebook_weights(const Codebook& cb) {
    std::vector<std::vector<cplx>> out;
    out.reserve(cb.size());
    for (const auto& cw : cb.codewords) out.push_back(phase_weights(cw.config.phases));
    return out;
}

inline std::vector<double> quantize_all(const std::vector<double>& phases, unsigned b) {
    std::vector<double> q(phases.size());
    for (std::size_t n = 0; n < phases.size(); ++n) q[n] = quantize_phase(phases[n], b);
    return q;
}

/// Continuous phases that rotate every element term onto a target phase.
inline std::vector<double> alignment_phases(const std::vector<cplx>& terms, double target) {
    std::vector<double> p(terms.size());
    for (std::size_t n = 0; n < terms.size(); ++n) p[n] = wrap_phase(target - std::arg(terms[n]));
    return p;
}

/// Quantizes phases after adding the common offset (one of 16 sub-step offsets) that keeps
/// the largest coherent magnitude. Ties go to the smallest offset.
inline std::vector<double> quantize_best_offset(const std::vector<cplx>& terms, const std::vector<double>& phases,
                                                unsigned b) {
    constexpr int kOffsets = 16;
    const double step = PhaseSet{b}.step();
    std::vector<double> best;
    double best_mag = -1.0;
    std::vector<double> q(phases.size());
    for (int k = 0; k < kOffsets; ++k) {
        const double off = step * static_cast<double>(k) / kOffsets;
        cplx s{0.0, 0.0};
        for (std::size_t n = 0; n < phases.size(); ++n) {
            q[n] = quantize_phase(phases[n] + off, b);
            s += terms[n] * std::polar(1.0, q[n]);
        }
        const double mag = std::abs(s);
        if (mag > best_mag * (1.0 + 1e-12)) {
            best_mag = mag;
            best = q;
        }
    }
    return best;
}

/// Aligns every reflected term with the direct-path phase, then quantizes per element.
inline Codeword comm_codeword(const ScenarioGeometry& g, const RISSpec& spec, const LinkBudget& budget,
                              const LargeScaleParams& params, unsigned b) {
    const cplx hd = direct_channel(g, budget, params);
    const auto terms = reflected_terms(g, spec, budget);
    return {{quantize_all(alignment_phases(terms, std::arg(hd)), b)}, Family::Comm, 0};
}

/// Co-phases the element terms (element 0 at phase 0) to maximise |h_r|, ignoring the direct path.
inline Codeword pos_codeword(const ScenarioGeometry& g, const RISSpec& spec, const LinkBudget& budget, unsigned b) {
    const auto terms = reflected_terms(g, spec, budget);
    const auto cont = alignment_phases(terms, std::arg(terms.front()));
    return {{quantize_best_offset(terms, cont, b)}, Family::Pos, 0};
}

/// Evenly spaced anchors along the region x-extent on the region's centre line.
inline std::vector<UserPos2D> default_anchors(double x_min, double x_max, double y_min, double y_max,
                                              std::size_t count) {
    std::vector<UserPos2D> a(count);
    const double y = 0.5 * (y_min + y_max);
    for (std::size_t k = 0; k < count; ++k) {
        const double f = (static_cast<double>(k) + 0.5) / static_cast<double>(count);
        a[k] = {x_min + f * (x_max - x_min), y};
    }
    return a;
}

/// Three families per anchor, ordered Comm, Pos, Balanced.
///  Comm k: one beam co-phasing all anchors with their direct paths, rotated by 2 pi k / A.
///  Pos k: the magnitude-maximising co-phased beam for anchor k.
///  Balanced k: element-wise circular mean of Comm k and Pos k.
inline Codebook build_codebook(const Scenario& sc, unsigned b, std::size_t M, const std::vector<UserPos2D>& anchors) {
    if (M == 0 || M % 3 != 0) throw InvalidConfig("codebook size must be a positive multiple of 3");
    const std::size_t A = M / 3;
    if (anchors.size() != A) throw InvalidConfig("number of anchors must equal M/3");
    const std::size_t N = sc.ris_spec.n_elements;

    std::vector<std::vector<cplx>> terms;
    std::vector<cplx> acc(N, cplx{0.0, 0.0});
    for (const auto& a : anchors) {
        const UserLink link(sc, a);
        terms.push_back(link.terms());
        const cplx hd_dir = std::polar(1.0, std::arg(link.h_d(1.0)));
        for (std::size_t n = 0; n < N; ++n) acc[n] += hd_dir * std::conj(terms.back()[n]);
    }
    std::vector<double> base(N);
    for (std::size_t n = 0; n < N; ++n) base[n] = std::arg(acc[n]);

    Codebook cb{N, b, {}};
    for (std::size_t k = 0; k < A; ++k) {
        const double rot = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(A);
        std::vector<double> comm(N);
        for (std::size_t n = 0; n < N; ++n) comm[n] = quantize_phase(base[n] + rot, b);

        const auto& t = terms[k];
        const auto pos = quantize_best_offset(t, alignment_phases(t, std::arg(t.front())), b);

        std::vector<double> bal(N);
        for (std::size_t n = 0; n < N; ++n) {
            const cplx s = std::polar(1.0, comm[n]) + std::polar(1.0, pos[n]);
            const double mid = std::abs(s) > 1e-12 ? std::arg(s) : comm[n] + 0.5 * kPi;
            bal[n] = quantize_phase(mid, b);
        }
        cb.codewords.push_back({{std::move(comm)}, Family::Comm, cb.codewords.size()});
        cb.codewords.push_back({{pos}, Family::Pos, cb.codewords.size()});
        cb.codewords.push_back({{std::move(bal)}, Family::Balanced, cb.codewords.size()});
    }
    return cb;
}

inline nlohmann::json codebook_to_json(const Codebook& cb) {
    nlohmann::json j;
    j["N"] = cb.n_elements;
    j["b"] = cb.bits;
    j["codewords"] = nlohmann::json::array();
    for (const auto& cw : cb.codewords)
        j["codewords"].push_back({{"id", cw.id}, {"family", family_name(cw.family)}, {"phases", cw.config.phases}});
    return j;
}

inline Codebook codebook_from_json(const nlohmann::json& j) {
    try {
        Codebook cb;
        cb.n_elements = j.at("N").get<std::size_t>();
        cb.bits = j.at("b").get<unsigned>();
        const double step = PhaseSet{cb.bits}.step();
        for (const auto& e : j.at("codewords")) {
            Codeword cw;
            cw.id = e.at("id").get<std::size_t>();
            cw.family = family_from_name(e.at("family").get<std::string>());
            for (double p : e.at("phases").get<std::vector<double>>()) {
                // snap printed values back onto the exact lattice
                const double k = std::round(p / step);
                cw.config.phases.push_back(std::abs(p / step - k) < 1e-9 ? k * step : p);
            }
            cb.codewords.push_back(std::move(cw));
        }
        cb.validate();
        return cb;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidConfig(std::string("malformed codebook file: ") + e.what());
    }
}

inline void save_codebook(const Codebook& cb, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw InvalidConfig("cannot write codebook file " + path);
    os << codebook_to_json(cb).dump(1) << '\n';
}

inline Codebook load_codebook(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InvalidConfig("cannot read codebook file " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidConfig(std::string("malformed codebook file: ") + e.what());
    }
    return codebook_from_json(j);
}

} // namespace risntn
