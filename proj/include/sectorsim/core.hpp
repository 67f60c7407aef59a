#pragma once

// Dense tensor-product states over small sites and the primitive operations
// the rest of the library builds on.
//
// Flat indexing convention: site 0 is the fastest-varying digit, so
//   flat = sum_s label_s * prod_{s' < s} dim_{s'}.

#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sectorsim {

using Amplitude = std::complex<double>;

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class DimensionLimitError : public Error {
  public:
    using Error::Error;
};

class ShapeError : public Error {
  public:
    using Error::Error;
};

class TargetError : public Error {
  public:
    using Error::Error;
};

class LabelError : public Error {
  public:
    using Error::Error;
};

class ParameterError : public Error {
  public:
    using Error::Error;
};

class InsufficientDopantError : public Error {
  public:
    using Error::Error;
};

class ContractViolation : public Error {
  public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Tolerances and the dimension guard

inline constexpr double kAlgebraTol = 1e-12;
inline constexpr double kNormTol = 1e-10;

inline constexpr std::size_t kDefaultDimensionGuard = std::size_t{1} << 26;

namespace detail {
inline std::atomic<std::size_t>& guard_storage() {
    static std::atomic<std::size_t> guard{kDefaultDimensionGuard};
    return guard;
}
}  // namespace detail

/// Largest number of amplitudes any dense object may hold.
inline std::size_t dimension_guard() { return detail::guard_storage().load(std::memory_order_relaxed); }

inline void set_dimension_guard(std::size_t limit) {
    detail::guard_storage().store(limit, std::memory_order_relaxed);
}

/// Restores the previous guard on scope exit.
class ScopedDimensionGuard {
  public:
    explicit ScopedDimensionGuard(std::size_t limit) : previous_(dimension_guard()) { set_dimension_guard(limit); }
    ~ScopedDimensionGuard() { set_dimension_guard(previous_); }
    ScopedDimensionGuard(const ScopedDimensionGuard&) = delete;
    ScopedDimensionGuard& operator=(const ScopedDimensionGuard&) = delete;

  private:
    std::size_t previous_;
};

/// Product of `dims`, or throws DimensionLimitError once it passes `limit`.
inline std::size_t checked_dimension(const std::vector<std::size_t>& dims, std::size_t limit) {
    std::size_t total = 1;
    for (std::size_t d : dims) {
        if (d != 0 && total > limit / d) {
            throw DimensionLimitError("total dimension exceeds guard of " + std::to_string(limit));
        }
        total *= d;
    }
    if (total > limit) {
        throw DimensionLimitError("total dimension " + std::to_string(total) + " exceeds guard of " +
                                  std::to_string(limit));
    }
    return total;
}

inline bool is_finite(const Amplitude& a) { return std::isfinite(a.real()) && std::isfinite(a.imag()); }

// ---------------------------------------------------------------------------
// Basis labels

namespace electron {
inline constexpr std::size_t ground = 0;   // impurity level, "bottom"
inline constexpr std::size_t excited = 1;  // conduction band, "top"
inline constexpr std::size_t dim = 2;
}  // namespace electron

namespace photon {
inline constexpr std::size_t vacuum = 0;
inline constexpr std::size_t H = 1;
inline constexpr std::size_t V = 2;
inline constexpr std::size_t dim = 3;
}  // namespace photon

// ---------------------------------------------------------------------------
// SiteSpec

class SiteSpec {
  public:
    SiteSpec() = default;

    explicit SiteSpec(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
        for (std::size_t d : dims_) {
            if (d < 2) {
                throw ShapeError("site dimension must be at least 2");
            }
        }
        total_ = checked_dimension(dims_, dimension_guard());
        strides_.resize(dims_.size());
        std::size_t stride = 1;
        for (std::size_t s = 0; s < dims_.size(); ++s) {
            strides_[s] = stride;
            stride *= dims_[s];
        }
    }

    static SiteSpec uniform(std::size_t count, std::size_t dim) {
        return SiteSpec(std::vector<std::size_t>(count, dim));
    }

    std::size_t num_sites() const { return dims_.size(); }
    std::size_t dim(std::size_t site) const { return dims_.at(site); }
    std::size_t stride(std::size_t site) const { return strides_.at(site); }
    std::size_t total_dimension() const { return total_; }
    const std::vector<std::size_t>& dims() const { return dims_; }

    std::size_t digit(std::size_t flat, std::size_t site) const { return (flat / strides_[site]) % dims_[site]; }

    std::size_t flat_index(const std::vector<std::size_t>& labels) const {
        if (labels.size() != dims_.size()) {
            throw LabelError("expected " + std::to_string(dims_.size()) + " labels, got " +
                             std::to_string(labels.size()));
        }
        std::size_t flat = 0;
        for (std::size_t s = 0; s < labels.size(); ++s) {
            if (labels[s] >= dims_[s]) {
                throw LabelError("label " + std::to_string(labels[s]) + " out of range for site " +
                                 std::to_string(s));
            }
            flat += labels[s] * strides_[s];
        }
        return flat;
    }

    std::vector<std::size_t> labels(std::size_t flat) const {
        std::vector<std::size_t> out(dims_.size());
        for (std::size_t s = 0; s < dims_.size(); ++s) {
            out[s] = digit(flat, s);
        }
        return out;
    }

    friend bool operator==(const SiteSpec& a, const SiteSpec& b) { return a.dims_ == b.dims_; }

  private:
    std::vector<std::size_t> dims_;
    std::vector<std::size_t> strides_;
    std::size_t total_ = 1;
};

// ---------------------------------------------------------------------------
// DenseState

class DenseState {
  public:
    DenseState() = default;

    /// Zero vector over `sites`.
    explicit DenseState(SiteSpec sites) : sites_(std::move(sites)), amps_(sites_.total_dimension()) {}

    DenseState(SiteSpec sites, std::vector<Amplitude> amplitudes)
        : sites_(std::move(sites)), amps_(std::move(amplitudes)) {
        if (amps_.size() != sites_.total_dimension()) {
            throw ShapeError("amplitude count " + std::to_string(amps_.size()) + " does not match dimension " +
                             std::to_string(sites_.total_dimension()));
        }
        for (const auto& a : amps_) {
            if (!is_finite(a)) {
                throw ParameterError("non-finite amplitude");
            }
        }
    }

    const SiteSpec& sites() const { return sites_; }
    std::size_t size() const { return amps_.size(); }
    const std::vector<Amplitude>& amplitudes() const { return amps_; }
    std::vector<Amplitude>& amplitudes() { return amps_; }

    Amplitude operator[](std::size_t flat) const { return amps_[flat]; }
    Amplitude& operator[](std::size_t flat) { return amps_[flat]; }

    Amplitude at(const std::vector<std::size_t>& labels) const { return amps_[sites_.flat_index(labels)]; }

    double norm_squared() const {
        double acc = 0.0;
        for (const auto& a : amps_) {
            acc += std::norm(a);
        }
        return acc;
    }
    double norm() const { return std::sqrt(norm_squared()); }

    bool is_normalized(double tol = kNormTol) const { return std::abs(norm() - 1.0) <= tol; }

    DenseState& operator*=(Amplitude k) {
        for (auto& a : amps_) {
            a *= k;
        }
        return *this;
    }

    DenseState& operator+=(const DenseState& other) {
        if (!(sites_ == other.sites_)) {
            throw ShapeError("cannot add states over different sites");
        }
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            amps_[i] += other.amps_[i];
        }
        return *this;
    }

    friend DenseState operator*(Amplitude k, DenseState s) { return s *= k; }
    friend DenseState operator+(DenseState a, const DenseState& b) { return a += b; }

  private:
    SiteSpec sites_;
    std::vector<Amplitude> amps_;
};

inline DenseState basis_state(const SiteSpec& sites, const std::vector<std::size_t>& labels) {
    DenseState out(sites);
    out[sites.flat_index(labels)] = 1.0;
    return out;
}

/// Single-site state from explicit amplitudes.
inline DenseState site_state(std::vector<Amplitude> amplitudes) {
    SiteSpec sites({amplitudes.size()});
    return DenseState(std::move(sites), std::move(amplitudes));
}

inline DenseState tensor_product(const DenseState& a, const DenseState& b) {
    std::vector<std::size_t> dims = a.sites().dims();
    dims.insert(dims.end(), b.sites().dims().begin(), b.sites().dims().end());
    DenseState out{SiteSpec(std::move(dims))};
    const std::size_t na = a.size();
    for (std::size_t y = 0; y < b.size(); ++y) {
        const Amplitude by = b[y];
        for (std::size_t x = 0; x < na; ++x) {
            out[x + na * y] = a[x] * by;
        }
    }
    return out;
}

/// <a|b>, conjugate-linear in `a`.
inline Amplitude inner_product(const DenseState& a, const DenseState& b) {
    if (!(a.sites() == b.sites())) {
        throw ShapeError("inner product of states over different sites");
    }
    Amplitude acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += std::conj(a[i]) * b[i];
    }
    return acc;
}

// ---------------------------------------------------------------------------
// TwoSiteGate

/// Square matrix on an ordered site pair (i, j). Rows and columns use the
/// local index a + d_i * b for labels (a on site i, b on site j).
class TwoSiteGate {
  public:
    TwoSiteGate(std::size_t first, std::size_t second, std::size_t dim_first, std::size_t dim_second,
                std::vector<Amplitude> row_major)
        : first_(first), second_(second), dim_first_(dim_first), dim_second_(dim_second),
          matrix_(std::move(row_major)) {
        const std::size_t n = dim_first_ * dim_second_;
        if (matrix_.size() != n * n) {
            throw ShapeError("gate matrix must be (d_i*d_j)^2 entries");
        }
        unitarity_defect_ = compute_unitarity_defect();
    }

    std::size_t first() const { return first_; }
    std::size_t second() const { return second_; }
    std::size_t dim_first() const { return dim_first_; }
    std::size_t dim_second() const { return dim_second_; }
    std::size_t local_dimension() const { return dim_first_ * dim_second_; }

    Amplitude operator()(std::size_t row, std::size_t col) const { return matrix_[row * local_dimension() + col]; }
    const std::vector<Amplitude>& matrix() const { return matrix_; }

    /// max |(G^dagger G - I)_{rc}|
    double unitarity_defect() const { return unitarity_defect_; }
    bool is_unitary(double tol = kAlgebraTol) const { return unitarity_defect_ <= tol; }

    /// Same matrix on a different site pair.
    TwoSiteGate on(std::size_t first, std::size_t second) const {
        TwoSiteGate g = *this;
        g.first_ = first;
        g.second_ = second;
        return g;
    }

  private:
    double compute_unitarity_defect() const {
        const std::size_t n = local_dimension();
        double worst = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) {
                Amplitude acc = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    acc += std::conj((*this)(k, r)) * (*this)(k, c);
                }
                if (r == c) {
                    acc -= 1.0;
                }
                worst = std::max(worst, std::abs(acc));
            }
        }
        return worst;
    }

    std::size_t first_;
    std::size_t second_;
    std::size_t dim_first_;
    std::size_t dim_second_;
    std::vector<Amplitude> matrix_;
    double unitarity_defect_ = 0.0;
};

inline TwoSiteGate identity_gate(std::size_t first, std::size_t second, std::size_t dim_first,
                                 std::size_t dim_second) {
    const std::size_t n = dim_first * dim_second;
    std::vector<Amplitude> m(n * n);
    for (std::size_t k = 0; k < n; ++k) {
        m[k * n + k] = 1.0;
    }
    return TwoSiteGate(first, second, dim_first, dim_second, std::move(m));
}

/// Applies `gate` in place. Only amplitudes on the (i, j) subspace mix.
inline void apply_two_site_gate_inplace(DenseState& state, const TwoSiteGate& gate) {
    const SiteSpec& sites = state.sites();
    const std::size_t i = gate.first();
    const std::size_t j = gate.second();
    if (i == j) {
        throw TargetError("gate targets must be distinct sites");
    }
    if (i >= sites.num_sites() || j >= sites.num_sites()) {
        throw TargetError("gate target out of range");
    }
    if (sites.dim(i) != gate.dim_first() || sites.dim(j) != gate.dim_second()) {
        throw ShapeError("gate dimensions do not match target sites");
    }
    if (!gate.is_unitary()) {
        throw ContractViolation("gate is not unitary (defect " + std::to_string(gate.unitarity_defect()) + ")");
    }

    const std::size_t di = gate.dim_first();
    const std::size_t dj = gate.dim_second();
    const std::size_t n = di * dj;
    const std::size_t si = sites.stride(i);
    const std::size_t sj = sites.stride(j);

    std::vector<std::size_t> offsets(n);
    for (std::size_t b = 0; b < dj; ++b) {
        for (std::size_t a = 0; a < di; ++a) {
            offsets[a + di * b] = a * si + b * sj;
        }
    }

    std::vector<Amplitude> in(n);
    std::vector<Amplitude> out(n);
    auto& amps = state.amplitudes();
    for (std::size_t base = 0; base < amps.size(); ++base) {
        if (sites.digit(base, i) != 0 || sites.digit(base, j) != 0) {
            continue;
        }
        for (std::size_t k = 0; k < n; ++k) {
            in[k] = amps[base + offsets[k]];
        }
        for (std::size_t r = 0; r < n; ++r) {
            Amplitude acc = 0.0;
            for (std::size_t c = 0; c < n; ++c) {
                acc += gate(r, c) * in[c];
            }
            out[r] = acc;
        }
        for (std::size_t k = 0; k < n; ++k) {
            amps[base + offsets[k]] = out[k];
        }
    }
}

inline DenseState apply_two_site_gate(DenseState state, const TwoSiteGate& gate) {
    apply_two_site_gate_inplace(state, gate);
    return state;
}

}  // namespace sectorsim
