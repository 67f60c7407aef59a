#pragma once

// Finite-N sector parameter X_N = (1/N) sum_a |phi_a><phi_a| (x) I_rest:
// exact action and expectation on product states, a dense reference
// operator for small N, and the commutator of two such parameters.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "sectorsim/core.hpp"

namespace sectorsim {

using SiteVector = std::vector<Amplitude>;
using DenseOperator = Eigen::MatrixXcd;

namespace detail {

inline Amplitude site_inner(const SiteVector& a, const SiteVector& b) {
    if (a.size() != b.size()) {
        throw ShapeError("single-site states of different dimension");
    }
    Amplitude acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        acc += std::conj(a[k]) * b[k];
    }
    return acc;
}

inline void require_normalized_sites(const std::vector<SiteVector>& states, const char* what) {
    for (std::size_t a = 0; a < states.size(); ++a) {
        if (states[a].size() < 2) {
            throw ShapeError(std::string(what) + ": site dimension must be at least 2");
        }
        for (const auto& x : states[a]) {
            if (!is_finite(x)) {
                throw ParameterError(std::string(what) + ": non-finite amplitude");
            }
        }
        const double nrm = std::sqrt(std::real(site_inner(states[a], states[a])));
        if (std::abs(nrm - 1.0) > kAlgebraTol) {
            throw ParameterError(std::string(what) + ": site " + std::to_string(a) + " is not normalized");
        }
    }
}

inline DenseState product_of(const std::vector<SiteVector>& states) {
    std::vector<std::size_t> dims;
    dims.reserve(states.size());
    for (const auto& s : states) {
        dims.push_back(s.size());
    }
    SiteSpec sites(std::move(dims));
    DenseState out(sites);
    for (std::size_t flat = 0; flat < out.size(); ++flat) {
        Amplitude amp = 1.0;
        for (std::size_t a = 0; a < states.size() && amp != 0.0; ++a) {
            amp *= states[a][sites.digit(flat, a)];
        }
        out[flat] = amp;
    }
    return out;
}

}  // namespace detail

/// Reference states {phi_a}; each entry is one normalized site vector.
class ElementaryFamily {
  public:
    explicit ElementaryFamily(std::vector<SiteVector> phi) : phi_(std::move(phi)) {
        detail::require_normalized_sites(phi_, "ElementaryFamily");
    }

    static ElementaryFamily uniform(std::size_t count, const SiteVector& phi) {
        return ElementaryFamily(std::vector<SiteVector>(count, phi));
    }

    std::size_t size() const { return phi_.size(); }
    const SiteVector& operator[](std::size_t a) const { return phi_[a]; }
    const std::vector<SiteVector>& states() const { return phi_; }

    DenseState dense() const { return detail::product_of(phi_); }

  private:
    std::vector<SiteVector> phi_;
};

/// Product state {psi_a}. Which sites count as modified is relative to a family.
class ProductState {
  public:
    explicit ProductState(std::vector<SiteVector> psi) : psi_(std::move(psi)) {
        detail::require_normalized_sites(psi_, "ProductState");
    }

    /// The family itself with the listed sites replaced.
    static ProductState modify(const ElementaryFamily& family,
                               const std::vector<std::pair<std::size_t, SiteVector>>& replacements) {
        std::vector<SiteVector> psi = family.states();
        for (const auto& [site, state] : replacements) {
            if (site >= psi.size()) {
                throw TargetError("replacement site out of range");
            }
            psi[site] = state;
        }
        return ProductState(std::move(psi));
    }

    std::size_t size() const { return psi_.size(); }
    const SiteVector& operator[](std::size_t a) const { return psi_[a]; }
    const std::vector<SiteVector>& states() const { return psi_; }

    /// Indices where psi_a differs from phi_a (amplitude-wise, beyond 1e-12).
    std::vector<std::size_t> modified_set(const ElementaryFamily& family) const {
        if (family.size() != psi_.size()) {
            throw ShapeError("family and product state have different N");
        }
        std::vector<std::size_t> out;
        for (std::size_t a = 0; a < psi_.size(); ++a) {
            const SiteVector& phi = family[a];
            if (phi.size() != psi_[a].size()) {
                throw ShapeError("site dimension mismatch at site " + std::to_string(a));
            }
            for (std::size_t k = 0; k < phi.size(); ++k) {
                if (std::abs(phi[k] - psi_[a][k]) > kAlgebraTol) {
                    out.push_back(a);
                    break;
                }
            }
        }
        return out;
    }

    double modified_fraction(const ElementaryFamily& family) const {
        if (psi_.empty()) {
            return 0.0;
        }
        return static_cast<double>(modified_set(family).size()) / static_cast<double>(psi_.size());
    }

    ProductState with_site(std::size_t a, SiteVector state) const {
        std::vector<SiteVector> psi = psi_;
        psi.at(a) = std::move(state);
        return ProductState(std::move(psi));
    }

    DenseState dense() const { return detail::product_of(psi_); }

  private:
    std::vector<SiteVector> psi_;
};

struct SectorTerm {
    Amplitude coefficient;
    ProductState state;
};

/// X_N |Psi> as a finite linear combination of product states.
struct SectorAction {
    std::vector<SectorTerm> terms;

    DenseState dense() const {
        if (terms.empty()) {
            throw ShapeError("empty sector action");
        }
        DenseState out(terms.front().state.dense().sites());
        for (const auto& t : terms) {
            out += t.coefficient * t.state.dense();
        }
        return out;
    }
};

namespace detail {
inline void require_same_n(const ElementaryFamily& family, std::size_t n) {
    if (family.size() != n) {
        throw ShapeError("N mismatch: family has " + std::to_string(family.size()) + ", state has " +
                         std::to_string(n));
    }
    if (n == 0) {
        throw ShapeError("sector parameter needs N >= 1");
    }
}
}  // namespace detail

/// <Psi|X_N|Psi> = 1 + (1/N) sum_{a in I_C} (|<phi_a|psi_a>|^2 - 1).
inline double sector_expectation(const ElementaryFamily& family, const ProductState& state) {
    detail::require_same_n(family, state.size());
    const double n = static_cast<double>(state.size());
    double acc = 0.0;
    for (std::size_t a : state.modified_set(family)) {
        acc += std::norm(detail::site_inner(family[a], state[a])) - 1.0;
    }
    return std::clamp(1.0 + acc / n, 0.0, 1.0);
}

/// Exact X_N |Psi>: (1 - M/N)|Psi> + (1/N) sum_{a in I_C} <phi_a|psi_a> |Psi with site a set to phi_a>.
/// Terms whose coefficient vanishes are dropped.
inline SectorAction sector_apply(const ElementaryFamily& family, const ProductState& state) {
    detail::require_same_n(family, state.size());
    const auto modified = state.modified_set(family);
    const double n = static_cast<double>(state.size());
    const double m = static_cast<double>(modified.size());
    constexpr double kDrop = 1e-15;

    SectorAction action;
    const double stay = 1.0 - m / n;
    if (stay > kDrop) {
        action.terms.push_back({stay, state});
    }
    for (std::size_t a : modified) {
        const Amplitude c = detail::site_inner(family[a], state[a]) / n;
        if (std::abs(c) > kDrop) {
            action.terms.push_back({c, state.with_site(a, family[a])});
        }
    }
    return action;
}

/// Dense X_N in the flat-index convention. The matrix has D^2 entries,
/// which is what the dimension guard limits here.
inline DenseOperator dense_sector_operator(const ElementaryFamily& family) {
    if (family.size() == 0) {
        throw ShapeError("sector parameter needs N >= 1");
    }
    std::vector<std::size_t> dims;
    for (const auto& phi : family.states()) {
        dims.push_back(phi.size());
    }
    const std::size_t total = checked_dimension(dims, dimension_guard());
    if (total > dimension_guard() / total) {
        throw DimensionLimitError("dense operator of dimension " + std::to_string(total) + " exceeds guard");
    }
    SiteSpec sites(dims);
    const double inv_n = 1.0 / static_cast<double>(family.size());

    DenseOperator x = DenseOperator::Zero(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
    for (std::size_t a = 0; a < family.size(); ++a) {
        const SiteVector& phi = family[a];
        const std::size_t stride = sites.stride(a);
        for (std::size_t col = 0; col < total; ++col) {
            const std::size_t ca = sites.digit(col, a);
            const std::size_t rest = col - ca * stride;
            const Amplitude right = std::conj(phi[ca]) * inv_n;
            for (std::size_t r = 0; r < phi.size(); ++r) {
                x(static_cast<Eigen::Index>(rest + r * stride), static_cast<Eigen::Index>(col)) += phi[r] * right;
            }
        }
    }
    return x;
}

/// ||[|phi><phi|, |chi><chi|]|| = t sqrt(1 - t^2) with t = |<phi|chi>|.
inline double single_site_commutator_norm(const SiteVector& phi, const SiteVector& chi) {
    const double t = std::min(1.0, std::abs(detail::site_inner(phi, chi)));
    return t * std::sqrt(std::max(0.0, 1.0 - t * t));
}

/// Closed form of ||[X_N, X'_N]||. Different-site commutators vanish and the
/// same-site ones act on separate factors, so their extreme eigenvalues add:
/// the norm is (1/N^2) sum_a s_a, which is max_a s_a / N for uniform families.
inline double commutator_norm_analytic(const ElementaryFamily& a, const ElementaryFamily& b) {
    detail::require_same_n(a, b.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        sum += single_site_commutator_norm(a[k], b[k]);
    }
    const double n = static_cast<double>(a.size());
    return sum / (n * n);
}

inline double commutator_norm_dense(const ElementaryFamily& a, const ElementaryFamily& b) {
    detail::require_same_n(a, b.size());
    const DenseOperator xa = dense_sector_operator(a);
    const DenseOperator xb = dense_sector_operator(b);
    if (xa.rows() != xb.rows()) {
        throw ShapeError("families have different site dimensions");
    }
    // The commutator of two Hermitian operators is anti-Hermitian; i[.,.] is Hermitian.
    const DenseOperator herm = Amplitude(0.0, 1.0) * (xa * xb - xb * xa);
    Eigen::SelfAdjointEigenSolver<DenseOperator> solver(herm, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace sectorsim
