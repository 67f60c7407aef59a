#pragma once

// Single-APD avalanche. Electron 0 is the photoexcited seed; at generation n
// each electron k < 2^(n-1) scatters on dopant k + 2^(n-1). Two engines:
// dense evolution of all A electrons, and the structured factorisation of
// |Phi_n> into blocks Z_0 ... Z_n plus an untouched ground remainder.

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sectorsim/core.hpp"

namespace sectorsim {

struct AvalancheParams {
    std::size_t dopants = 1;  // A
    Amplitude eta = 0.0;
    unsigned n_max = 0;
};

namespace detail {

inline constexpr double kUnitDiskSlack = 1e-12;

inline void require_eta(Amplitude eta) {
    if (!is_finite(eta) || std::abs(eta) > 1.0 + kUnitDiskSlack) {
        throw ParameterError("collision amplitude |eta| must be <= 1");
    }
}

/// sqrt(1 - |eta|^2), clamped at 0 on the unit circle.
inline double complement(Amplitude eta) { return std::sqrt(std::max(0.0, 1.0 - std::norm(eta))); }

inline std::size_t cascade_size(unsigned n) {
    if (n >= 63) {
        throw InsufficientDopantError("generation " + std::to_string(n) + " is out of range");
    }
    return std::size_t{1} << n;
}

inline void require_dopants(std::size_t dopants, unsigned n) {
    if (cascade_size(n) > dopants) {
        throw InsufficientDopantError("generation " + std::to_string(n) + " needs " +
                                      std::to_string(cascade_size(n)) + " dopants, have " +
                                      std::to_string(dopants));
    }
}

}  // namespace detail

inline void validate(const AvalancheParams& p) {
    detail::require_eta(p.eta);
    if (p.dopants == 0) {
        throw ParameterError("need at least one dopant electron");
    }
    detail::require_dopants(p.dopants, p.n_max);
}

// ---------------------------------------------------------------------------
// Scattering gate

/// Collision operator S on (exciter, target):
///   S|T,B> = |T> (x) (c|B> + eta|T>),  S|B,B> = |B,B>,
///   S|T,T> = |T> (x) (c|T> - conj(eta)|B>),  S|B,T> = |B,T>,
/// with c = sqrt(1 - |eta|^2). The first two rows are the physical ones; the
/// completion rows on an already excited target differ from the printed
/// model (|B,T> -> |B,B>, |T,T> -> |T>(c|T> + eta|B>)), which is not unitary.
inline TwoSiteGate scattering_gate(Amplitude eta, std::size_t exciter = 0, std::size_t target = 1) {
    detail::require_eta(eta);
    const double c = detail::complement(eta);
    // Local index: exciter label + 2 * target label.
    // 0 = |B,B>, 1 = |T,B>, 2 = |B,T>, 3 = |T,T>.
    std::vector<Amplitude> m(16, 0.0);
    auto at = [&m](std::size_t r, std::size_t col) -> Amplitude& { return m[r * 4 + col]; };
    at(0, 0) = 1.0;
    at(1, 1) = c;
    at(3, 1) = eta;
    at(2, 2) = 1.0;
    at(1, 3) = -std::conj(eta);
    at(3, 3) = c;
    return TwoSiteGate(exciter, target, electron::dim, electron::dim, std::move(m));
}

/// The completion exactly as the model text states it. Kept for comparison;
/// it fails the unitarity check for every eta (|B,T> and |B,B> collide).
inline TwoSiteGate scattering_gate_as_printed(Amplitude eta, std::size_t exciter = 0, std::size_t target = 1) {
    detail::require_eta(eta);
    const double c = detail::complement(eta);
    std::vector<Amplitude> m(16, 0.0);
    auto at = [&m](std::size_t r, std::size_t col) -> Amplitude& { return m[r * 4 + col]; };
    at(0, 0) = 1.0;
    at(1, 1) = c;
    at(3, 1) = eta;
    at(0, 2) = 1.0;
    at(1, 3) = eta;
    at(3, 3) = c;
    return TwoSiteGate(exciter, target, electron::dim, electron::dim, std::move(m));
}

/// (exciter, target) pairs of generation n >= 1: (k, k + 2^(n-1)).
inline std::vector<std::pair<std::size_t, std::size_t>> generation_pairs(unsigned n) {
    if (n == 0) {
        return {};
    }
    const std::size_t half = detail::cascade_size(n - 1);
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(half);
    for (std::size_t k = 0; k < half; ++k) {
        out.emplace_back(k, k + half);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dense engine

/// Applies generation `n` to an electron register whose electron 0 sits at
/// site `first_site` of `state`.
inline void apply_generation(DenseState& state, Amplitude eta, unsigned n, std::size_t first_site = 0) {
    const TwoSiteGate s = scattering_gate(eta);
    for (const auto& [exciter, target] : generation_pairs(n)) {
        apply_two_site_gate_inplace(state, s.on(first_site + exciter, first_site + target));
    }
}

/// |Omega> over A electrons.
inline DenseState ground_register(std::size_t dopants) {
    return basis_state(SiteSpec::uniform(dopants, electron::dim),
                       std::vector<std::size_t>(dopants, electron::ground));
}

/// |Omega'> = |T_0> (x) |Omega(1..A-1)>, also the generation-0 avalanche state.
inline DenseState no_avalanche_register(std::size_t dopants) {
    std::vector<std::size_t> labels(dopants, electron::ground);
    labels.at(0) = electron::excited;
    return basis_state(SiteSpec::uniform(dopants, electron::dim), labels);
}

inline DenseState dense_avalanche(const AvalancheParams& params, unsigned n) {
    detail::require_eta(params.eta);
    detail::require_dopants(params.dopants, n);
    DenseState state = no_avalanche_register(params.dopants);
    for (unsigned g = 1; g <= n; ++g) {
        apply_generation(state, params.eta, g);
    }
    return state;
}

// ---------------------------------------------------------------------------
// Structured engine

/// Electron indices of each block at generation n. Level 0 holds the seed,
/// level l >= 1 holds 2^(l-1) electrons; the remainder [2^n, A) is ground.
class ZBlockPartition {
  public:
    static ZBlockPartition initial(std::size_t dopants) {
        ZBlockPartition p;
        p.dopants_ = dopants;
        p.levels_ = {{0}};
        return p;
    }

    /// One generation of pairing: each block Z_l(L) absorbs its targets
    /// L + 2^n and becomes Z_{l+1}(L ++ (L + 2^n)); the seed's target opens
    /// a new Z_1.
    ZBlockPartition next() const {
        detail::require_dopants(dopants_, generation_ + 1);
        if (detail::cascade_size(generation_ + 1) > dimension_guard()) {
            throw DimensionLimitError("partition index lists exceed the dimension guard");
        }
        const std::size_t shift = detail::cascade_size(generation_);
        ZBlockPartition p;
        p.dopants_ = dopants_;
        p.generation_ = generation_ + 1;
        p.levels_.resize(levels_.size() + 1);
        p.levels_[0] = levels_[0];
        p.levels_[1] = {levels_[0].front() + shift};
        for (std::size_t l = 1; l < levels_.size(); ++l) {
            std::vector<std::size_t> grown = levels_[l];
            grown.reserve(2 * grown.size());
            for (std::size_t idx : levels_[l]) {
                grown.push_back(idx + shift);
            }
            p.levels_[l + 1] = std::move(grown);
        }
        return p;
    }

    unsigned generation() const { return generation_; }
    std::size_t dopants() const { return dopants_; }
    std::size_t num_levels() const { return levels_.size(); }
    const std::vector<std::size_t>& level(std::size_t l) const { return levels_.at(l); }
    const std::vector<std::vector<std::size_t>>& levels() const { return levels_; }

    std::size_t remainder_begin() const { return detail::cascade_size(generation_); }
    std::size_t remainder_end() const { return dopants_; }

  private:
    unsigned generation_ = 0;
    std::size_t dopants_ = 1;
    std::vector<std::vector<std::size_t>> levels_;
};

/// <Omega|Z_l>: 0 for l = 0, else sqrt(1-|eta|^2) + eta * prod_{m<l} <Omega|Z_m>.
inline Amplitude block_ground_overlap(unsigned level, Amplitude eta) {
    detail::require_eta(eta);
    const double c = detail::complement(eta);
    Amplitude current = 0.0;  // level 0
    Amplitude prefix = 1.0;   // product over levels below `current`
    for (unsigned l = 1; l <= level; ++l) {
        prefix *= current;
        current = c + eta * prefix;
    }
    return current;
}

/// <Omega'|Phi_n>, Omega' the seed-only state. The seed block matches
/// exactly; every other level contributes <Omega|Z_l>. O(n) time, O(1) memory.
inline Amplitude overlap_no_avalanche(const AvalancheParams& params, unsigned n) {
    detail::require_eta(params.eta);
    detail::require_dopants(params.dopants, n);
    const double c = detail::complement(params.eta);
    Amplitude result = 1.0;
    Amplitude block = 0.0;   // <Omega|Z_0>
    Amplitude prefix = 1.0;  // prod_{m<l} <Omega|Z_m>
    for (unsigned l = 1; l <= n; ++l) {
        prefix *= block;
        block = c + params.eta * prefix;
        result *= block;
    }
    return result;
}

/// <Omega|Phi_n>. The seed factor <B_0|Z_0> = <B|T> vanishes, so this is 0.
inline Amplitude overlap_ground(const AvalancheParams& params, unsigned n) {
    const Amplitude seed_factor = 0.0;
    return seed_factor * overlap_no_avalanche(params, n);
}

class StructuredAvalancheState {
  public:
    StructuredAvalancheState(AvalancheParams params, unsigned n) : params_(params) {
        detail::require_eta(params_.eta);
        detail::require_dopants(params_.dopants, n);
        // Partitions of every generation up to n; block Z_l's internal
        // structure reuses generation l-1 relabelled onto the block's list.
        partitions_.push_back(ZBlockPartition::initial(params_.dopants));
        for (unsigned g = 1; g <= n; ++g) {
            partitions_.push_back(partitions_.back().next());
        }
    }

    const AvalancheParams& params() const { return params_; }
    unsigned generation() const { return partitions_.back().generation(); }
    const ZBlockPartition& partition() const { return partitions_.back(); }

    /// <labels|Phi_n> from the block expansion, without building any block.
    Amplitude amplitude(const std::vector<std::size_t>& labels) const {
        if (labels.size() != params_.dopants) {
            throw LabelError("expected one label per dopant electron");
        }
        const ZBlockPartition& p = partition();
        for (std::size_t e = p.remainder_begin(); e < p.remainder_end(); ++e) {
            if (labels[e] != electron::ground) {
                return 0.0;
            }
        }
        std::vector<std::size_t> identity(detail::cascade_size(generation()));
        for (std::size_t k = 0; k < identity.size(); ++k) {
            identity[k] = k;
        }
        return cascade_amplitude(generation(), identity, labels);
    }

    /// Norm from the block recursion ||Z_l||^2 = (1-|eta|^2) + |eta|^2 ||Phi_{l-1}||^2;
    /// the cross term vanishes since Phi_{l-1} always holds an excited seed.
    double norm() const {
        const double c2 = 1.0 - std::norm(params_.eta);
        const double e2 = std::norm(params_.eta);
        double phi2 = 1.0;
        for (unsigned l = 1; l <= generation(); ++l) {
            phi2 *= c2 + e2 * phi2;
        }
        return std::sqrt(phi2);
    }

    Amplitude overlap_no_avalanche() const { return sectorsim::overlap_no_avalanche(params_, generation()); }
    Amplitude overlap_ground() const { return sectorsim::overlap_ground(params_, generation()); }

  private:
    // Amplitude of the generation-m cascade laid out on electrons `list`.
    Amplitude cascade_amplitude(unsigned m, const std::vector<std::size_t>& list,
                                const std::vector<std::size_t>& labels) const {
        const ZBlockPartition& p = partitions_.at(m);
        Amplitude amp = 1.0;
        std::vector<std::size_t> block;
        for (std::size_t l = 0; l < p.num_levels() && amp != 0.0; ++l) {
            block.clear();
            for (std::size_t pos : p.level(l)) {
                block.push_back(list[pos]);
            }
            amp *= block_amplitude(static_cast<unsigned>(l), block, labels);
        }
        return amp;
    }

    // Z_0 = |T>;  Z_l(L) = c |Omega(L)> + eta * (generation l-1 cascade on L).
    Amplitude block_amplitude(unsigned l, const std::vector<std::size_t>& list,
                              const std::vector<std::size_t>& labels) const {
        if (l == 0) {
            return labels[list.front()] == electron::excited ? 1.0 : 0.0;
        }
        bool all_ground = true;
        for (std::size_t e : list) {
            all_ground = all_ground && labels[e] == electron::ground;
        }
        const Amplitude ground_part = all_ground ? Amplitude(detail::complement(params_.eta)) : Amplitude(0.0);
        if (params_.eta == 0.0) {
            return ground_part;
        }
        return ground_part + params_.eta * cascade_amplitude(l - 1, list, labels);
    }

    AvalancheParams params_;
    std::vector<ZBlockPartition> partitions_;
};

inline StructuredAvalancheState structured_avalanche(const AvalancheParams& params, unsigned n) {
    return StructuredAvalancheState(params, n);
}

}  // namespace sectorsim
