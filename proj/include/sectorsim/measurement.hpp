#pragma once

// Polarisation measurement: a photon behind a polarising beamsplitter feeding
// two avalanche photodiodes (ports H and V). Joint site order is
//   photon, H electrons 0..A_H-1, V electrons 0..A_V-1.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sectorsim/avalanche.hpp"
#include "sectorsim/core.hpp"

namespace sectorsim {

struct PhotonPolarisation {
    Amplitude h = 1.0;
    Amplitude v = 0.0;
};

struct MeasurementSetup {
    PhotonPolarisation pol;
    Amplitude delta = 1.0;
    Amplitude eta = 0.0;
    std::size_t dopants_h = 1;
    std::size_t dopants_v = 1;
    unsigned n_max = 0;
};

enum class Reference { ground, no_avalanche };
enum class Engine { dense, structured };

inline void validate(const PhotonPolarisation& pol) {
    if (!is_finite(pol.h) || !is_finite(pol.v)) {
        throw ParameterError("non-finite polarisation amplitude");
    }
    if (std::abs(std::norm(pol.h) + std::norm(pol.v) - 1.0) > kAlgebraTol) {
        throw ParameterError("polarisation must satisfy |h|^2 + |v|^2 = 1");
    }
}

inline void validate(const MeasurementSetup& s) {
    validate(s.pol);
    if (!is_finite(s.delta) || std::abs(s.delta) > 1.0 + detail::kUnitDiskSlack) {
        throw ParameterError("photoexcitation amplitude |delta| must be <= 1");
    }
    detail::require_eta(s.eta);
    if (s.dopants_h == 0 || s.dopants_v == 0) {
        throw ParameterError("each APD needs at least one dopant electron");
    }
    detail::require_dopants(std::min(s.dopants_h, s.dopants_v), s.n_max);
}

inline AvalancheParams port_params(const MeasurementSetup& s, std::size_t dopants) {
    return AvalancheParams{dopants, s.eta, s.n_max};
}

inline SiteSpec joint_sites(const MeasurementSetup& s) {
    std::vector<std::size_t> dims;
    dims.reserve(1 + s.dopants_h + s.dopants_v);
    dims.push_back(photon::dim);
    dims.insert(dims.end(), s.dopants_h + s.dopants_v, electron::dim);
    return SiteSpec(std::move(dims));
}

inline std::size_t h_register_site(const MeasurementSetup&) { return 1; }
inline std::size_t v_register_site(const MeasurementSetup& s) { return 1 + s.dopants_h; }

inline DenseState photon_state(const PhotonPolarisation& pol) {
    return site_state({0.0, pol.h, pol.v});
}

inline DenseState photon_vacuum() { return site_state({1.0, 0.0, 0.0}); }

/// |gamma> (x) |Omega^H> (x) |Omega^V>.
inline DenseState initial_state(const MeasurementSetup& s) {
    validate(s);
    (void)joint_sites(s);  // guard before allocating pieces
    return tensor_product(tensor_product(photon_state(s.pol), ground_register(s.dopants_h)),
                          ground_register(s.dopants_v));
}

/// Absorption at the first dopant of one port, on (photon, electron):
///   |P,B> -> delta |0,T> + sqrt(1-|delta|^2) |P,B>,
/// completed unitarily by |0,T> -> -conj(delta) |P,B> + sqrt(1-|delta|^2) |0,T>.
inline TwoSiteGate photoexcitation_gate(Amplitude delta, std::size_t port_label, std::size_t photon_site,
                                        std::size_t electron_site) {
    const double c = detail::complement(delta);
    const std::size_t n = photon::dim * electron::dim;
    std::vector<Amplitude> m(n * n, 0.0);
    auto idx = [](std::size_t p, std::size_t e) { return p + photon::dim * e; };
    for (std::size_t k = 0; k < n; ++k) {
        m[k * n + k] = 1.0;
    }
    const std::size_t port = idx(port_label, electron::ground);
    const std::size_t clicked = idx(photon::vacuum, electron::excited);
    m[port * n + port] = c;
    m[clicked * n + port] = delta;
    m[port * n + clicked] = -std::conj(delta);
    m[clicked * n + clicked] = c;
    return TwoSiteGate(photon_site, electron_site, photon::dim, electron::dim, std::move(m));
}

inline DenseState photoexcite(const MeasurementSetup& s, DenseState state) {
    validate(s);
    if (!(state.sites() == joint_sites(s))) {
        throw ShapeError("state is not shaped like the measurement setup");
    }
    apply_two_site_gate_inplace(state, photoexcitation_gate(s.delta, photon::H, 0, h_register_site(s)));
    apply_two_site_gate_inplace(state, photoexcitation_gate(s.delta, photon::V, 0, v_register_site(s)));
    return state;
}

namespace detail {
inline void require_generation(const MeasurementSetup& s, unsigned n) {
    if (n > s.n_max) {
        throw ParameterError("generation " + std::to_string(n) + " exceeds n_max " + std::to_string(s.n_max));
    }
}

struct Branches {
    DenseState no_click;  // |gamma, Omega^H, Omega^V>
    DenseState click_h;   // |0, Phi_n^H, Omega^V>
    DenseState click_v;   // |0, Omega^H, Phi_n^V>
    DenseState phi_h;
    DenseState phi_v;
};

inline Branches branches(const MeasurementSetup& s, unsigned n) {
    validate(s);
    require_generation(s, n);
    (void)joint_sites(s);
    DenseState phi_h = dense_avalanche(port_params(s, s.dopants_h), n);
    DenseState phi_v = dense_avalanche(port_params(s, s.dopants_v), n);
    const DenseState omega_h = ground_register(s.dopants_h);
    const DenseState omega_v = ground_register(s.dopants_v);
    const DenseState vac = photon_vacuum();
    Branches b{tensor_product(tensor_product(photon_state(s.pol), omega_h), omega_v),
               tensor_product(tensor_product(vac, phi_h), omega_v),
               tensor_product(tensor_product(vac, omega_h), phi_v), std::move(phi_h), std::move(phi_v)};
    return b;
}
}  // namespace detail

/// |Psi_n> assembled from its three branches. Only a register holding an
/// excited seed is evolved; S fixes |B,B>, so this equals the global unitary.
inline DenseState evolve(const MeasurementSetup& s, unsigned n) {
    detail::Branches b = detail::branches(s, n);
    const Amplitude c = detail::complement(s.delta);
    DenseState out = c * std::move(b.no_click);
    out += (s.delta * s.pol.h) * b.click_h;
    out += (s.delta * s.pol.v) * b.click_v;
    return out;
}

/// Same state by brute force: photoexcitation, then every generation's gates
/// applied to both registers of the joint state.
inline DenseState evolve_global(const MeasurementSetup& s, unsigned n) {
    validate(s);
    detail::require_generation(s, n);
    DenseState state = photoexcite(s, initial_state(s));
    for (unsigned g = 1; g <= n; ++g) {
        apply_generation(state, s.eta, g, h_register_site(s));
        apply_generation(state, s.eta, g, v_register_site(s));
    }
    return state;
}

// ---------------------------------------------------------------------------
// Sector parameter P_M

struct MeasurementRecord {
    unsigned n = 0;
    std::uint64_t electrons = 1;  // M = 2^n
    std::optional<double> expectation_direct;
    double expectation_formula = 0.0;
    Amplitude overlap_h = 0.0;
    Amplitude overlap_v = 0.0;
    double limit = 0.0;

    double overlap_abs() const { return std::abs(overlap_h * overlap_v); }
};

inline double sector_limit(const MeasurementSetup& s) {
    return std::norm(s.delta) * (std::norm(s.pol.h) - std::norm(s.pol.v));
}

/// |delta|^2 (|h|^2 - |v|^2) (1 - |x_H x_V|^2).
inline double expectation_formula(const MeasurementSetup& s, Amplitude x_h, Amplitude x_v) {
    return sector_limit(s) * (1.0 - std::norm(x_h * x_v));
}

inline MeasurementRecord sector_parameter_expectation(const MeasurementSetup& s, unsigned n, Reference reference,
                                                      Engine engine = Engine::structured) {
    validate(s);
    detail::require_generation(s, n);
    MeasurementRecord rec;
    rec.n = n;
    rec.electrons = std::uint64_t{1} << n;
    rec.limit = sector_limit(s);

    if (engine == Engine::structured) {
        const auto ph = port_params(s, s.dopants_h);
        const auto pv = port_params(s, s.dopants_v);
        if (reference == Reference::ground) {
            rec.overlap_h = overlap_ground(ph, n);
            rec.overlap_v = overlap_ground(pv, n);
        } else {
            rec.overlap_h = overlap_no_avalanche(ph, n);
            rec.overlap_v = overlap_no_avalanche(pv, n);
        }
        rec.expectation_formula = expectation_formula(s, rec.overlap_h, rec.overlap_v);
        return rec;
    }

    const detail::Branches b = detail::branches(s, n);
    const DenseState ref_h =
        reference == Reference::ground ? ground_register(s.dopants_h) : no_avalanche_register(s.dopants_h);
    const DenseState ref_v =
        reference == Reference::ground ? ground_register(s.dopants_v) : no_avalanche_register(s.dopants_v);
    rec.overlap_h = inner_product(ref_h, b.phi_h);
    rec.overlap_v = inner_product(ref_v, b.phi_v);
    rec.expectation_formula = expectation_formula(s, rec.overlap_h, rec.overlap_v);

    const DenseState psi = evolve(s, n);
    rec.expectation_direct = std::norm(inner_product(b.click_h, psi)) - std::norm(inner_product(b.click_v, psi));
    return rec;
}

// ---------------------------------------------------------------------------
// Density operator decomposition

struct DensityTerm {
    std::string label;
    Amplitude coefficient;  // weight of |ket><bra| in rho_n
    Amplitude trace;        // <bra|ket>
    double modulus = 0.0;   // |coefficient * trace|
};

/// The six term families of rho_n = |Psi_n><Psi_n| over the branches
/// (no-click, H click, V click): three diagonal, three cross (each + h.c.).
inline std::array<DensityTerm, 6> density_terms(const MeasurementSetup& s, unsigned n) {
    const detail::Branches b = detail::branches(s, n);
    const Amplitude c = detail::complement(s.delta);
    const Amplitude dh = s.delta * s.pol.h;
    const Amplitude dv = s.delta * s.pol.v;
    auto term = [](std::string label, Amplitude coeff, const DenseState& ket, const DenseState& bra) {
        const Amplitude tr = inner_product(bra, ket);
        return DensityTerm{std::move(label), coeff, tr, std::abs(coeff * tr)};
    };
    return {
        term("no_click_diagonal", c * c, b.no_click, b.no_click),
        term("hh_diagonal", std::norm(dh), b.click_h, b.click_h),
        term("vv_diagonal", std::norm(dv), b.click_v, b.click_v),
        term("no_click_h_cross", c * std::conj(dh), b.no_click, b.click_h),
        term("no_click_v_cross", c * std::conj(dv), b.no_click, b.click_v),
        term("hv_cross", dh * std::conj(dv), b.click_h, b.click_v),
    };
}

// ---------------------------------------------------------------------------
// QND variant: system photon s entangled with ancilla m by a C-NOT.

namespace qnd {
inline constexpr std::size_t H = 0;
inline constexpr std::size_t V = 1;
}  // namespace qnd

inline TwoSiteGate cnot_gate(std::size_t control, std::size_t target) {
    // local index: control + 2 * target
    std::vector<Amplitude> m(16, 0.0);
    auto at = [&m](std::size_t r, std::size_t c) -> Amplitude& { return m[r * 4 + c]; };
    at(0, 0) = 1.0;
    at(2, 2) = 1.0;
    at(3, 1) = 1.0;
    at(1, 3) = 1.0;
    return TwoSiteGate(control, target, 2, 2, std::move(m));
}

/// h|H_s H_m> + v|V_s V_m>, sites (s, m).
inline DenseState qnd_premeasure(const PhotonPolarisation& pol) {
    validate(pol);
    const DenseState system = site_state({pol.h, pol.v});
    const DenseState ancilla = site_state({1.0, 0.0});
    return apply_two_site_gate(tensor_product(system, ancilla), cnot_gate(0, 1));
}

struct QndOutcome {
    double p_h = 0.0;
    double p_v = 0.0;
    std::optional<DenseState> post_h;  // system state after reading H on the ancilla
    std::optional<DenseState> post_v;
};

inline QndOutcome qnd_outcome(const PhotonPolarisation& pol) {
    const DenseState joint = qnd_premeasure(pol);
    auto conditional = [&joint](std::size_t ancilla) -> std::pair<double, std::optional<DenseState>> {
        std::vector<Amplitude> sys(2);
        for (std::size_t a = 0; a < 2; ++a) {
            sys[a] = joint.at({a, ancilla});
        }
        const double p = std::norm(sys[0]) + std::norm(sys[1]);
        if (p == 0.0) {
            return {0.0, std::nullopt};
        }
        const std::size_t lead = std::norm(sys[0]) >= std::norm(sys[1]) ? 0 : 1;
        const Amplitude unphase = std::conj(sys[lead]) / (std::abs(sys[lead]) * std::sqrt(p));
        for (auto& x : sys) {
            x *= unphase;
        }
        return {p, site_state(std::move(sys))};
    };
    auto [ph, sh] = conditional(qnd::H);
    auto [pv, sv] = conditional(qnd::V);
    return QndOutcome{ph, pv, std::move(sh), std::move(sv)};
}

/// Uniform double in [0, 1) from the top 53 bits; portable across standard libraries.
inline double uniform_unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct QndCounts {
    std::uint64_t h = 0;
    std::uint64_t v = 0;
};

inline QndCounts sample_qnd(const PhotonPolarisation& pol, std::uint64_t seed, std::uint64_t draws) {
    const QndOutcome out = qnd_outcome(pol);
    std::mt19937_64 rng(seed);
    QndCounts counts;
    for (std::uint64_t k = 0; k < draws; ++k) {
        if (uniform_unit(rng) < out.p_h) {
            ++counts.h;
        } else {
            ++counts.v;
        }
    }
    return counts;
}

// ---------------------------------------------------------------------------
// Order-of-magnitude device scales (elementary charge = 1: volts <-> eV).

struct ScaleReport {
    double l_over_a = 0.0;
    double mean_free_path = 0.0;  // metres
    double generations = 0.0;     // g = U e / Delta
    double electrons = 0.0;       // M = 2^g
    double work = 0.0;            // W_m = Delta * min(A, M), eV
};

inline ScaleReport physical_scales(double bias_volts, double gap_ev, double width_m, double dopants) {
    if (!(bias_volts > 0.0) || !(gap_ev > 0.0) || !(width_m > 0.0) || !(dopants > 0.0)) {
        throw ParameterError("physical scales need positive U, Delta, a and A");
    }
    ScaleReport r;
    r.generations = bias_volts / gap_ev;
    r.l_over_a = gap_ev / bias_volts;
    r.mean_free_path = r.l_over_a * width_m;
    r.electrons = std::exp2(r.generations);
    r.work = gap_ev * std::min(dopants, r.electrons);
    return r;
}

}  // namespace sectorsim
