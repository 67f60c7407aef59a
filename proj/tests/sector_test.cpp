#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "sectorsim/sector.hpp"
#include "test_util.hpp"

using namespace sectorsim;

namespace {

const SiteVector kZero = {1.0, 0.0};
const SiteVector kOne = {0.0, 1.0};
const SiteVector kPlus = {std::sqrt(0.5), std::sqrt(0.5)};

Eigen::VectorXcd as_vector(const DenseState& s) {
    Eigen::VectorXcd v(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) v(k) = s[k];
    return v;
}

SiteVector random_site(std::mt19937_64& rng, std::size_t dim = 2) {
    SiteVector v(dim);
    double n2 = 0.0;
    for (auto& a : v) {
        a = sectorsim::testing::gaussian_amplitude(rng);
        n2 += std::norm(a);
    }
    for (auto& a : v) a /= std::sqrt(n2);
    return v;
}

}  // namespace

TEST(SectorExpectation, UnmodifiedIsOne) {
    const auto fam = ElementaryFamily::uniform(6, kPlus);
    EXPECT_DOUBLE_EQ(sector_expectation(fam, ProductState(fam.states())), 1.0);
}

TEST(SectorExpectation, OneOrthogonalSiteOfFour) {
    const auto fam = ElementaryFamily::uniform(4, kZero);
    const auto psi = ProductState::modify(fam, {{2, kOne}});
    EXPECT_NEAR(sector_expectation(fam, psi), 0.75, 1e-15);
    EXPECT_DOUBLE_EQ(psi.modified_fraction(fam), 0.25);
    // Dense cross-check.
    const Eigen::VectorXcd v = as_vector(psi.dense());
    EXPECT_NEAR((v.adjoint() * dense_sector_operator(fam) * v)(0).real(), 0.75, 1e-12);
}

TEST(SectorExpectation, HalfOverlapAtNTwo) {
    const auto fam = ElementaryFamily::uniform(2, kZero);
    const auto psi = ProductState::modify(fam, {{0, kPlus}});
    EXPECT_NEAR(sector_expectation(fam, psi), 0.75, 1e-15);
    const Eigen::VectorXcd v = as_vector(psi.dense());
    EXPECT_NEAR((v.adjoint() * dense_sector_operator(fam) * v)(0).real(), 0.75, 1e-12);
}

TEST(SectorExpectation, Errors) {
    const auto fam = ElementaryFamily::uniform(3, kZero);
    EXPECT_THROW(sector_expectation(fam, ProductState({kZero, kZero})), ShapeError);
    EXPECT_THROW(ElementaryFamily({{1.0, 1.0}}), ParameterError);
}

TEST(SectorApply, UnmodifiedIsSingleTerm) {
    const auto fam = ElementaryFamily::uniform(3, kPlus);
    const auto action = sector_apply(fam, ProductState(fam.states()));
    ASSERT_EQ(action.terms.size(), 1u);
    EXPECT_EQ(action.terms[0].coefficient, Amplitude(1.0));
    EXPECT_EQ(action.terms[0].state.states(), fam.states());
}

TEST(SectorApply, SingleModificationHasTwoTerms) {
    const std::size_t n = 5;
    const auto fam = ElementaryFamily::uniform(n, kZero);
    const auto psi = ProductState::modify(fam, {{1, kPlus}});
    const auto action = sector_apply(fam, psi);
    ASSERT_EQ(action.terms.size(), 2u);
    EXPECT_NEAR(std::abs(action.terms[0].coefficient - (1.0 - 1.0 / n)), 0.0, 1e-15);
    EXPECT_EQ(action.terms[0].state.states(), psi.states());
    EXPECT_NEAR(std::abs(action.terms[1].coefficient - std::sqrt(0.5) / n), 0.0, 1e-15);
    // With one modification the replaced state is Phi_N itself.
    EXPECT_EQ(action.terms[1].state.states(), fam.states());
}

TEST(SectorApply, TwoOrthogonalModificationsCollapse) {
    const auto fam = ElementaryFamily::uniform(4, kZero);
    const auto psi = ProductState::modify(fam, {{0, kOne}, {3, kOne}});
    const auto action = sector_apply(fam, psi);
    ASSERT_EQ(action.terms.size(), 1u);
    EXPECT_NEAR(std::abs(action.terms[0].coefficient - 0.5), 0.0, 1e-15);
    const Eigen::VectorXcd expected = dense_sector_operator(fam) * as_vector(psi.dense());
    EXPECT_LE((as_vector(action.dense()) - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DenseSectorOperator, SingleSiteIsProjector) {
    const SiteVector phi = {Amplitude(0.6, 0.0), Amplitude(0.0, 0.8)};
    const auto x = dense_sector_operator(ElementaryFamily({phi}));
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            EXPECT_LE(std::abs(x(r, c) - phi[r] * std::conj(phi[c])), 1e-15);
        }
    }
}

TEST(DenseSectorOperator, TwoSitesHandAssembly) {
    const auto x = dense_sector_operator(ElementaryFamily::uniform(2, kZero));
    Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(4, 4);
    expected(0, 0) = 1.0;
    expected(1, 1) = 0.5;
    expected(2, 2) = 0.5;
    EXPECT_LE((x - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(DenseSectorOperator, SpectrumAndEigenvalueOne) {
    std::mt19937_64 rng(17);
    for (std::size_t n = 1; n <= 6; ++n) {
        std::vector<SiteVector> phis;
        for (std::size_t k = 0; k < n; ++k) phis.push_back(random_site(rng));
        const ElementaryFamily fam(phis);
        const auto x = dense_sector_operator(fam);
        EXPECT_LE((x - x.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
        Eigen::SelfAdjointEigenSolver<DenseOperator> es(x, Eigen::EigenvaluesOnly);
        EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
        EXPECT_LE(es.eigenvalues().maxCoeff(), 1.0 + 1e-10);
        const Eigen::VectorXcd phi = as_vector(fam.dense());
        EXPECT_LE((x * phi - phi).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(DenseSectorOperator, Guard) {
    ScopedDimensionGuard guard(1 << 10);
    EXPECT_NO_THROW(dense_sector_operator(ElementaryFamily::uniform(5, kZero)));
    EXPECT_THROW(dense_sector_operator(ElementaryFamily::uniform(6, kZero)), DimensionLimitError);
}

TEST(SectorProperties, RandomProductStatesMatchDenseOperator) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 1 + trial % 6;
        const std::size_t dim = trial % 5 == 0 ? 3 : 2;
        std::vector<SiteVector> phis;
        for (std::size_t k = 0; k < n; ++k) phis.push_back(random_site(rng, dim));
        const ElementaryFamily fam(phis);
        std::vector<std::pair<std::size_t, SiteVector>> repl;
        for (std::size_t k = 0; k < n; ++k) {
            if (rng() % 2) repl.emplace_back(k, random_site(rng, dim));
        }
        const auto psi = ProductState::modify(fam, repl);
        const auto x = dense_sector_operator(fam);
        const Eigen::VectorXcd v = as_vector(psi.dense());
        const Eigen::VectorXcd xv = x * v;
        EXPECT_LE((as_vector(sector_apply(fam, psi).dense()) - xv).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_NEAR(sector_expectation(fam, psi), (v.adjoint() * xv)(0).real(), 1e-12);
        // Finite-modification bound.
        EXPECT_LE(std::abs(sector_expectation(fam, psi) - 1.0), double(repl.size()) / n + 1e-15);
    }
}

TEST(Commutator, EqualFamiliesCommute) {
    const auto fam = ElementaryFamily::uniform(3, kPlus);
    EXPECT_EQ(commutator_norm_analytic(fam, fam), 0.0);
    EXPECT_LE(commutator_norm_dense(fam, fam), 1e-14);
}

TEST(Commutator, SingleSiteNormMatchesTwoByTwoEigenvalues) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const SiteVector a = random_site(rng);
        const SiteVector b = random_site(rng);
        Eigen::Matrix2cd pa, pb;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) {
                pa(r, c) = a[r] * std::conj(a[c]);
                pb(r, c) = b[r] * std::conj(b[c]);
            }
        const Eigen::Matrix2cd herm = Amplitude(0, 1) * (pa * pb - pb * pa);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(herm);
        EXPECT_NEAR(single_site_commutator_norm(a, b), es.eigenvalues().cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(Commutator, UniformHalfOverlapAtNFive) {
    const SiteVector tilted = {std::sqrt(0.5), Amplitude(0.0, std::sqrt(0.5))};
    const auto a = ElementaryFamily::uniform(5, kZero);
    const auto b = ElementaryFamily::uniform(5, tilted);
    EXPECT_NEAR(commutator_norm_analytic(a, b), 0.1, 1e-15);
    EXPECT_NEAR(commutator_norm_dense(a, b), 0.1, 1e-12);
}

TEST(Commutator, DoublingNHalvesNorm) {
    const SiteVector chi = {std::cos(0.4), std::sin(0.4)};
    const SiteVector psi = {std::cos(1.1), Amplitude(0.0, std::sin(1.1))};
    // Period-2 families extended by repetition.
    const ElementaryFamily a2({kZero, kPlus});
    const ElementaryFamily b2({chi, psi});
    const ElementaryFamily a4({kZero, kPlus, kZero, kPlus});
    const ElementaryFamily b4({chi, psi, chi, psi});
    EXPECT_NEAR(commutator_norm_dense(a4, b4), commutator_norm_dense(a2, b2) / 2.0, 1e-12);
    EXPECT_NEAR(commutator_norm_analytic(a4, b4), commutator_norm_analytic(a2, b2) / 2.0, 1e-15);
}

TEST(Commutator, NonUniformFamiliesUseSiteAverage) {
    std::mt19937_64 rng(31);
    for (std::size_t n = 2; n <= 5; ++n) {
        std::vector<SiteVector> pa, pb;
        for (std::size_t k = 0; k < n; ++k) {
            pa.push_back(random_site(rng));
            pb.push_back(random_site(rng));
        }
        const ElementaryFamily a(pa), b(pb);
        EXPECT_NEAR(commutator_norm_analytic(a, b), commutator_norm_dense(a, b), 1e-10);
    }
}
