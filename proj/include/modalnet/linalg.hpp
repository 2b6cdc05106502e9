#pragma once

// Dense complex linear-algebra kernels shared by the analysis modules.
//
// Everything internal runs in complex double precision. Real model matrices
// are promoted with `.cast<Complex>()` at the boundary.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace modalnet {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using CRowVector = Eigen::RowVectorXcd;
using RMatrix = Eigen::MatrixXd;

/// Numerical thresholds and the seed behind every randomized test.
struct Tolerances {
  /// Single-linkage radius for merging eigenvalues, multiplied by
  /// max(1, spectral radius of the pooled values).
  double eig_cluster_tol = 1e-7;
  /// Singular values at or below rank_rel_tol * sigma_max count as zero.
  double rank_rel_tol = 1e-10;
  /// Pencil determinant coefficients below pencil_zero_tol * scale are zero.
  double pencil_zero_tol = 1e-9;
  /// Random lambda samples for projection-fixedness; unset means rank(BC)+3.
  std::optional<int> sample_count;
  std::uint64_t rng_seed = 0x5EED;

  /// Throws InvalidArgument when a threshold is not strictly positive or
  /// sample_count < 2.
  void validate() const;

  double cluster_radius(double scale) const;
  int samples_for(int coupling_rank) const;
};

/// Kronecker product; block (i, j) of the result is a(i, j) * b.
template <typename DerivedA, typename DerivedB>
auto kron(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename Eigen::ScalarBinaryOpTraits<typename DerivedA::Scalar,
                                                      typename DerivedB::Scalar>::ReturnType;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(),
                                                            a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
          a(i, j) * b.template cast<Scalar>();
    }
  }
  return out;
}

struct EigDecomposition {
  CVector values;
  /// Columns are unit-norm right eigenvectors: M r = value r.
  CMatrix right_vectors;
  /// Rows are unit-norm left eigenvectors in the transpose sense: l^T M = value l^T.
  CMatrix left_vectors;
  /// Marks eigenvalues whose condition number 1/|l^T r| exceeds 1e8, which
  /// typically means a defective or nearly defective eigenvalue.
  std::vector<bool> ill_conditioned;
};

/// Orders complex values lexicographically on (real, imag).
bool lex_less(const Complex& a, const Complex& b);

/// Short human-readable form ("1", "0.5-2i"); imaginary parts below 1e-12
/// relative are dropped.
std::string format_complex(Complex z, int precision = 6);

/// Eigenvalues sorted by (Re, Im). Throws ConvergenceFailure.
CVector eigenvalues(const CMatrix& m);

/// Full eigendecomposition with both eigenvector sides; values sorted by
/// (Re, Im). Throws ConvergenceFailure or DimensionError for non-square input.
EigDecomposition eig_full(const CMatrix& m, const Tolerances& tol);

/// Largest singular value.
double spectral_norm(const CMatrix& m);

/// Number of singular values above rank_rel_tol * max(sigma_max, reference_scale).
/// A positive reference_scale makes the cutoff absolute for matrices whose
/// natural size is known, so a numerically zero matrix does not report rank 1.
int numerical_rank(const CMatrix& m, const Tolerances& tol, double reference_scale = 0.0);

/// Smallest retained singular value divided by the cutoff, and largest
/// dropped one divided by the cutoff. Used to flag tolerance-marginal verdicts.
struct RankMargin {
  int rank = 0;
  double cutoff = 0.0;
  double smallest_kept = 0.0;   // 0 when nothing kept
  double largest_dropped = 0.0; // 0 when nothing dropped
  /// True when any singular value sits within a factor of 10 of the cutoff.
  bool marginal() const;
};
RankMargin rank_margin(const CMatrix& m, const Tolerances& tol, double reference_scale = 0.0);

/// Orthonormal rows spanning {w^T : w^T M ~ 0}.
CMatrix left_null_basis(const CMatrix& m, const Tolerances& tol);

/// Left eigenvectors of f at mu: left null basis of f - mu I, with the row
/// count clamped to [1, algebraic]. The caller knows mu is an eigenvalue of f
/// with the given algebraic multiplicity, so at least one vector must exist
/// even when mu carries clustering error.
CMatrix left_eigenspace(const CMatrix& f, Complex mu, int algebraic, const Tolerances& tol);

struct Cluster {
  Complex representative;
  std::vector<std::size_t> members;
};

/// Single-linkage clustering at radius eig_cluster_tol * max(1, max |value|).
/// Representatives are member means; clusters sorted by representative.
std::vector<Cluster> cluster_values(std::span<const Complex> values, const Tolerances& tol);
std::vector<Cluster> cluster_values(const CVector& values, const Tolerances& tol);

/// True when some cluster decision is within a factor of 10 of the radius:
/// two clusters closer than 10 radii, or a link inside a cluster longer than
/// a tenth of the radius.
bool clustering_is_marginal(std::span<const Complex> values, const Tolerances& tol);

/// p(lambda) = det(A0 + lambda A1), coefficients in ascending degree.
struct PolyInLambda {
  std::vector<Complex> coefficients;
  int degree_bound = 0;
  /// Largest (max row norm)^n of A0 + lambda A1 over the interpolation
  /// points, an upper bound on |det|; the reference magnitude for zero tests.
  double scale = 0.0;

  Complex operator()(Complex lambda) const;
};

/// Interpolates det(a0 + lambda a1) at degree_bound + 1 roots of unity.
/// Exact for any determinant of degree <= degree_bound.
PolyInLambda det_poly_in_lambda(const CMatrix& a0, const CMatrix& a1, int degree_bound);

struct RootResult {
  /// Every coefficient is numerically zero: the pencil is singular for all lambda.
  bool degenerate = false;
  std::vector<Complex> roots;
  /// Largest coefficient magnitude over (pencil_zero_tol * scale); near 1 is marginal.
  double degeneracy_ratio = 0.0;
};

RootResult poly_roots(const PolyInLambda& p, const Tolerances& tol);

/// Geometric equals algebraic multiplicity for every eigenvalue cluster.
bool is_diagonalizable(const CMatrix& g, const Tolerances& tol);

/// Max |g - g^T| <= rank_rel_tol * max(1, |g|).
bool is_symmetric(const RMatrix& g, const Tolerances& tol);

}  // namespace modalnet
