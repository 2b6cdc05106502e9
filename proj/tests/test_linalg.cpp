#include <gtest/gtest.h>

#include <cmath>

#include "modalnet/errors.hpp"
#include "modalnet/linalg.hpp"
#include "test_support.hpp"

using namespace modalnet;
using testkit::Rng;

namespace {

double max_coeff(const testkit::Poly& p) {
  double out = 0.0;
  for (const auto& c : p) out = std::max(out, std::abs(c));
  return out;
}

}  // namespace

TEST(Tolerances, RejectsNonPositiveThresholds) {
  Tolerances tol;
  EXPECT_NO_THROW(tol.validate());
  tol.rank_rel_tol = 0.0;
  EXPECT_THROW(tol.validate(), InvalidArgument);
  tol = Tolerances{};
  tol.sample_count = 1;
  EXPECT_THROW(tol.validate(), InvalidArgument);
}

TEST(Tolerances, SampleCountDefaultsToCouplingRankPlusThree) {
  Tolerances tol;
  EXPECT_EQ(tol.samples_for(2), 5);
  tol.sample_count = 9;
  EXPECT_EQ(tol.samples_for(2), 9);
}

TEST(Kron, MatchesElementwiseDefinition) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const RMatrix a = testkit::random_matrix(rng, testkit::uniform_int(rng, 1, 4), testkit::uniform_int(rng, 1, 4));
    const CMatrix b = testkit::random_complex_matrix(rng, testkit::uniform_int(rng, 1, 3), testkit::uniform_int(rng, 1, 3));
    const CMatrix got = kron(a, b);
    const CMatrix want = testkit::naive_kron(a.cast<Complex>().eval(), b);
    ASSERT_EQ(got.rows(), want.rows());
    ASSERT_EQ(got.cols(), want.cols());
    EXPECT_LE((got - want).norm(), 1e-14);
  }
}

TEST(Kron, MixedProductProperty) {
  Rng rng(12);
  const RMatrix a = testkit::random_matrix(rng, 2, 3), b = testkit::random_matrix(rng, 3, 2);
  const RMatrix c = testkit::random_matrix(rng, 3, 2), d = testkit::random_matrix(rng, 2, 4);
  EXPECT_LE((kron(a, b) * kron(c, d) - kron(RMatrix(a * c), RMatrix(b * d))).norm(), 1e-12);
}

TEST(FormatComplex, DropsNegligibleParts) {
  EXPECT_EQ(format_complex(Complex(1.0, 0.0)), "1");
  EXPECT_EQ(format_complex(Complex(0.5, -2.0)), "0.5-2i");
  EXPECT_EQ(format_complex(Complex(-0.0, 3.0)), "3i");
  EXPECT_EQ(format_complex(Complex(2.0, 1e-15)), "2");
  EXPECT_EQ(format_complex(Complex(-0.0, 0.0)), "0");
}

TEST(EigFull, EigenpairsBothSides) {
  Rng rng(21);
  Tolerances tol;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = testkit::uniform_int(rng, 1, 6);
    const CMatrix m = testkit::random_complex_matrix(rng, n, n);
    const auto eig = eig_full(m, tol);
    ASSERT_EQ(eig.values.size(), n);
    for (int i = 0; i < n; ++i) {
      const Complex mu = eig.values(i);
      EXPECT_LE((m * eig.right_vectors.col(i) - mu * eig.right_vectors.col(i)).norm(), 1e-10);
      EXPECT_LE((eig.left_vectors.row(i) * m - mu * eig.left_vectors.row(i)).norm(), 1e-10);
      EXPECT_NEAR(eig.right_vectors.col(i).norm(), 1.0, 1e-12);
      EXPECT_NEAR(eig.left_vectors.row(i).norm(), 1.0, 1e-12);
      if (i > 0) EXPECT_FALSE(lex_less(eig.values(i), eig.values(i - 1)));
    }
  }
}

TEST(EigFull, FlagsJordanBlockAsIllConditioned) {
  CMatrix j(2, 2);
  j << 1.0, 1.0, 0.0, 1.0;
  const auto eig = eig_full(j, Tolerances{});
  EXPECT_TRUE(eig.ill_conditioned[0] || eig.ill_conditioned[1]);
}

TEST(EigFull, RejectsNonSquare) { EXPECT_THROW(eig_full(CMatrix::Zero(2, 3), Tolerances{}), DimensionError); }

TEST(Rank, NumericalRankAndMargin) {
  Tolerances tol;
  CMatrix m = CMatrix::Zero(3, 3);
  m(0, 0) = 1.0;
  m(1, 1) = 1e-3;
  EXPECT_EQ(numerical_rank(m, tol), 2);
  EXPECT_FALSE(rank_margin(m, tol).marginal());
  m(2, 2) = 5e-10;  // within 10x of the 1e-10 cutoff
  EXPECT_TRUE(rank_margin(m, tol).marginal());
}

TEST(Rank, ReferenceScaleKeepsTinyMatrixAtRankZero) {
  Tolerances tol;
  CMatrix m = CMatrix::Constant(2, 2, Complex(1e-14));
  EXPECT_EQ(numerical_rank(m, tol), 1);
  EXPECT_EQ(numerical_rank(m, tol, 1.0), 0);
}

TEST(Rank, AgreesWithOracleOnRandomLowRank) {
  Rng rng(31);
  Tolerances tol;
  for (int trial = 0; trial < 50; ++trial) {
    const int r = testkit::uniform_int(rng, 0, 4);
    const CMatrix m = testkit::random_complex_matrix(rng, 5, r) * testkit::random_complex_matrix(rng, r, 6);
    EXPECT_EQ(numerical_rank(m, tol, 1.0), r);
    EXPECT_EQ(testkit::svd_rank(m, 1e-10, 1.0), r);
  }
}

TEST(SpectralNorm, MatchesLargestSingularValue) {
  CMatrix m(2, 2);
  m << 3.0, 0.0, 0.0, -4.0;
  EXPECT_NEAR(spectral_norm(m), 4.0, 1e-14);
}

TEST(LeftNullBasis, OrthonormalAnnihilatingRows) {
  Rng rng(41);
  Tolerances tol;
  for (int trial = 0; trial < 30; ++trial) {
    const int r = testkit::uniform_int(rng, 0, 4);
    const CMatrix m = testkit::random_complex_matrix(rng, 5, r) * testkit::random_complex_matrix(rng, r, 4);
    const CMatrix w = left_null_basis(m, tol);
    EXPECT_EQ(w.rows(), 5 - r);
    EXPECT_EQ(w.cols(), 5);
    if (w.rows() == 0) continue;
    EXPECT_LE((w * m).norm(), 1e-10);
    EXPECT_LE((w * w.adjoint() - CMatrix::Identity(w.rows(), w.rows())).norm(), 1e-10);
  }
}

TEST(LeftEigenspace, ClampsToAlgebraicCount) {
  Tolerances tol;
  CMatrix jordan(3, 3);
  jordan << 2, 1, 0, 0, 2, 0, 0, 0, 5;
  // mu = 2 with algebraic multiplicity 2 but one eigenvector
  const CMatrix w = left_eigenspace(jordan, Complex(2.0), 2, tol);
  ASSERT_EQ(w.rows(), 1);
  EXPECT_LE((w * jordan - 2.0 * w).norm(), 1e-10);

  // slightly perturbed mu still yields one vector
  const CMatrix w2 = left_eigenspace(jordan, Complex(5.0 + 1e-9), 1, tol);
  ASSERT_EQ(w2.rows(), 1);
  EXPECT_LE((w2 * jordan - 5.0 * w2).norm(), 1e-7);

  const CMatrix scalar = 3.0 * CMatrix::Identity(3, 3);
  EXPECT_EQ(left_eigenspace(scalar, Complex(3.0), 3, tol).rows(), 3);
}

TEST(Cluster, MergesWithinRadiusAndSorts) {
  Tolerances tol;
  const std::vector<Complex> values = {Complex(2.0), Complex(1.0), Complex(1.0 + 1e-9), Complex(0.0, -1.0),
                                       Complex(2.0 - 5e-9)};
  const auto clusters = cluster_values(values, tol);
  ASSERT_EQ(clusters.size(), 3u);
  EXPECT_NEAR(std::abs(clusters[0].representative - Complex(0.0, -1.0)), 0.0, 1e-15);
  EXPECT_EQ(clusters[1].members.size(), 2u);
  EXPECT_EQ(clusters[2].members.size(), 2u);
  EXPECT_NEAR(clusters[1].representative.real(), 1.0 + 5e-10, 1e-15);
}

TEST(Cluster, RadiusScalesWithSpectralRadius) {
  Tolerances tol;
  const std::vector<Complex> values = {Complex(1e4), Complex(1e4 + 5e-4)};
  EXPECT_EQ(cluster_values(values, tol).size(), 1u);
  const std::vector<Complex> small = {Complex(1.0), Complex(1.0 + 5e-4)};
  EXPECT_EQ(cluster_values(small, tol).size(), 2u);
}

TEST(Cluster, MarginalNearRadius) {
  Tolerances tol;
  EXPECT_FALSE(clustering_is_marginal(std::vector<Complex>{1.0, 2.0}, tol));
  EXPECT_TRUE(clustering_is_marginal(std::vector<Complex>{1.0, 1.0 + 3e-7}, tol));
  EXPECT_TRUE(clustering_is_marginal(std::vector<Complex>{1.0, 1.0 + 5e-8}, tol));
}

TEST(DetPoly, MatchesCofactorExpansion) {
  Rng rng(51);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = testkit::uniform_int(rng, 1, 5);
    const CMatrix a0 = testkit::random_complex_matrix(rng, n, n);
    CMatrix a1 = testkit::random_complex_matrix(rng, n, n);
    const int r = testkit::uniform_int(rng, 0, n);
    if (r < n) a1 = testkit::random_complex_matrix(rng, n, r) * testkit::random_complex_matrix(rng, r, n);
    const auto got = det_poly_in_lambda(a0, a1, n);
    const auto want = testkit::cofactor_det_poly(a0, a1);
    const double scale = std::max(1.0, max_coeff(want));
    ASSERT_EQ(got.coefficients.size(), static_cast<std::size_t>(n + 1));
    for (int k = 0; k <= n; ++k) EXPECT_LE(std::abs(got.coefficients[k] - want[k]), 1e-12 * scale) << k;
    // degree is bounded by rank(a1)
    for (int k = r + 1; k <= n; ++k) EXPECT_LE(std::abs(got.coefficients[k]), 1e-12 * scale);
  }
}

TEST(DetPoly, EvaluatesLikeDeterminant) {
  Rng rng(52);
  const CMatrix a0 = testkit::random_complex_matrix(rng, 4, 4), a1 = testkit::random_complex_matrix(rng, 4, 4);
  const auto p = det_poly_in_lambda(a0, a1, 4);
  const Complex lambda(0.3, -1.7);
  EXPECT_LE(std::abs(p(lambda) - (a0 + lambda * a1).determinant()), 1e-11);
}

TEST(DetPoly, RejectsMismatchedShapes) {
  EXPECT_THROW(det_poly_in_lambda(CMatrix::Zero(2, 2), CMatrix::Zero(3, 3), 2), DimensionError);
}

TEST(PolyRoots, RecoversPlantedRoots) {
  Tolerances tol;
  // det(diag(l - 1, l + 2, 3)) = 3 (l - 1)(l + 2)
  CMatrix a0 = CMatrix::Zero(3, 3), a1 = CMatrix::Zero(3, 3);
  a0.diagonal() << -1.0, 2.0, 3.0;
  a1.diagonal() << 1.0, 1.0, 0.0;
  const auto roots = poly_roots(det_poly_in_lambda(a0, a1, 3), tol);
  EXPECT_FALSE(roots.degenerate);
  ASSERT_EQ(roots.roots.size(), 2u);
  EXPECT_NEAR(std::abs(roots.roots[0] - Complex(-2.0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(roots.roots[1] - Complex(1.0)), 0.0, 1e-12);
}

TEST(PolyRoots, IdenticallyZeroIsDegenerate) {
  Tolerances tol;
  // second row zero for every lambda
  CMatrix a0(2, 2), a1(2, 2);
  a0 << 1.0, 2.0, 0.0, 0.0;
  a1 << 3.0, -1.0, 0.0, 0.0;
  const auto roots = poly_roots(det_poly_in_lambda(a0, a1, 2), tol);
  EXPECT_TRUE(roots.degenerate);
  EXPECT_TRUE(roots.roots.empty());
  EXPECT_LT(roots.degeneracy_ratio, 1.0);
}

TEST(PolyRoots, ConstantNonzeroHasNoRoots) {
  CMatrix a0 = CMatrix::Identity(2, 2), a1 = CMatrix::Zero(2, 2);
  const auto roots = poly_roots(det_poly_in_lambda(a0, a1, 2), Tolerances{});
  EXPECT_FALSE(roots.degenerate);
  EXPECT_TRUE(roots.roots.empty());
}

TEST(Diagonalizable, DetectsJordanBlocks) {
  Tolerances tol;
  CMatrix j(3, 3);
  j << 1, 1, 0, 0, 1, 0, 0, 0, 2;
  EXPECT_FALSE(is_diagonalizable(j, tol));
  EXPECT_TRUE(is_diagonalizable(CMatrix::Identity(3, 3), tol));
  Rng rng(61);
  const RMatrix g = testkit::planted_g(rng, {1.0, 1.0, 4.0});
  EXPECT_TRUE(is_diagonalizable(g.cast<Complex>(), tol));
}

TEST(Symmetric, UsesRelativeTolerance) {
  Tolerances tol;
  RMatrix g(2, 2);
  g << 1.0, 2.0, 2.0 + 1e-13, 1.0;
  EXPECT_TRUE(is_symmetric(g, tol));
  g(1, 0) = 2.1;
  EXPECT_FALSE(is_symmetric(g, tol));
}
