#include "modalnet/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "modalnet/errors.hpp"

namespace modalnet {

void Tolerances::validate() const {
  if (!(eig_cluster_tol > 0.0) || !(rank_rel_tol > 0.0) || !(pencil_zero_tol > 0.0)) {
    throw InvalidArgument("tolerances must be strictly positive");
  }
  if (sample_count && *sample_count < 2) {
    throw InvalidArgument("sample_count must be at least 2");
  }
}

double Tolerances::cluster_radius(double scale) const {
  return eig_cluster_tol * std::max(1.0, scale);
}

int Tolerances::samples_for(int coupling_rank) const {
  return sample_count.value_or(coupling_rank + 3);
}

bool lex_less(const Complex& a, const Complex& b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

std::string format_complex(Complex z, int precision) {
  auto clean = [](double x) { return x == 0.0 ? 0.0 : x; };  // no "-0"
  const double tiny = 1e-12 * std::max(1.0, std::abs(z));
  const double re = std::abs(z.real()) <= tiny ? 0.0 : clean(z.real());
  const double im = std::abs(z.imag()) <= tiny ? 0.0 : clean(z.imag());
  std::ostringstream out;
  out << std::setprecision(precision);
  if (im == 0.0) {
    out << re;
  } else {
    if (re != 0.0) out << re << (im < 0 ? "-" : "+");
    else if (im < 0) out << "-";
    out << std::abs(im) << "i";
  }
  return out.str();
}

namespace {

std::vector<Eigen::Index> sorted_order(const CVector& values) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return lex_less(values(a), values(b));
  });
  return order;
}

void require_square(const CMatrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(what) + ": matrix must be square");
  }
}

Eigen::VectorXd singular_values(const CMatrix& m) {
  if (m.size() == 0) return {};
  Eigen::BDCSVD<CMatrix> svd(m);
  return svd.singularValues();
}

}  // namespace

CVector eigenvalues(const CMatrix& m) {
  require_square(m, "eigenvalues");
  if (m.size() == 0) return {};
  Eigen::ComplexEigenSolver<CMatrix> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure("eigenvalue iteration did not converge");
  }
  const CVector raw = solver.eigenvalues();
  const auto order = sorted_order(raw);
  CVector out(raw.size());
  for (std::size_t i = 0; i < order.size(); ++i) out(static_cast<Eigen::Index>(i)) = raw(order[i]);
  return out;
}

EigDecomposition eig_full(const CMatrix& m, const Tolerances& /*tol*/) {
  require_square(m, "eig_full");
  const Eigen::Index n = m.rows();
  EigDecomposition out;
  if (n == 0) return out;

  Eigen::ComplexEigenSolver<CMatrix> right(m, true);
  Eigen::ComplexEigenSolver<CMatrix> left(m.transpose(), true);
  if (right.info() != Eigen::Success || left.info() != Eigen::Success) {
    throw ConvergenceFailure("eigenvalue iteration did not converge");
  }

  const auto order = sorted_order(right.eigenvalues());
  out.values.resize(n);
  out.right_vectors.resize(n, n);
  out.left_vectors.resize(n, n);
  out.ill_conditioned.assign(static_cast<std::size_t>(n), false);

  // Pair each right eigenvalue with the closest unused eigenvalue of M^T.
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index src = order[static_cast<std::size_t>(i)];
    const Complex value = right.eigenvalues()(src);
    Eigen::Index best = -1;
    double best_dist = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double d = std::abs(left.eigenvalues()(j) - value);
      if (best < 0 || d < best_dist) {
        best = j;
        best_dist = d;
      }
    }
    used[static_cast<std::size_t>(best)] = true;

    out.values(i) = value;
    out.right_vectors.col(i) = right.eigenvectors().col(src).normalized();
    out.left_vectors.row(i) = left.eigenvectors().col(best).normalized().transpose();
    const double s = std::abs((out.left_vectors.row(i) * out.right_vectors.col(i))(0, 0));
    out.ill_conditioned[static_cast<std::size_t>(i)] = s < 1e-8;
  }
  return out;
}

double spectral_norm(const CMatrix& m) {
  const Eigen::VectorXd s = singular_values(m);
  return s.size() == 0 ? 0.0 : s(0);
}

bool RankMargin::marginal() const {
  if (cutoff <= 0.0) return false;
  return (smallest_kept > 0.0 && smallest_kept < 10.0) ||
         (largest_dropped > 0.1 && largest_dropped <= 1.0);
}

RankMargin rank_margin(const CMatrix& m, const Tolerances& tol, double reference_scale) {
  RankMargin out;
  const Eigen::VectorXd s = singular_values(m);
  if (s.size() == 0) return out;
  out.cutoff = tol.rank_rel_tol * std::max(s(0), reference_scale);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > out.cutoff) {
      ++out.rank;
      out.smallest_kept = s(i) / out.cutoff;
    } else if (out.cutoff > 0.0) {
      out.largest_dropped = std::max(out.largest_dropped, s(i) / out.cutoff);
    }
  }
  return out;
}

int numerical_rank(const CMatrix& m, const Tolerances& tol, double reference_scale) {
  return rank_margin(m, tol, reference_scale).rank;
}

CMatrix left_null_basis(const CMatrix& m, const Tolerances& tol) {
  if (m.rows() == 0) return CMatrix(0, m.cols());
  if (m.cols() == 0) return CMatrix::Identity(m.rows(), m.rows());
  Eigen::BDCSVD<CMatrix> svd(m, Eigen::ComputeFullU);
  const Eigen::VectorXd& s = svd.singularValues();
  const double cutoff = tol.rank_rel_tol * s(0);
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > cutoff) ++rank;
  const Eigen::Index nullity = m.rows() - rank;
  // u^H M = 0 for trailing left singular vectors, so w^T = u^H.
  return svd.matrixU().rightCols(nullity).adjoint();
}

CMatrix left_eigenspace(const CMatrix& f, Complex mu, int algebraic, const Tolerances& tol) {
  require_square(f, "left_eigenspace");
  const Eigen::Index n = f.rows();
  if (algebraic <= 0 || n == 0) return CMatrix(0, n);
  const CMatrix shifted = f - mu * CMatrix::Identity(n, n);
  Eigen::BDCSVD<CMatrix> svd(shifted, Eigen::ComputeFullU);
  const Eigen::VectorXd& s = svd.singularValues();
  const double cutoff = tol.rank_rel_tol * s(0);
  Eigen::Index small = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) <= cutoff) ++small;
  }
  const Eigen::Index dim = std::clamp<Eigen::Index>(small, 1, std::min<Eigen::Index>(algebraic, n));
  return svd.matrixU().rightCols(dim).adjoint();
}

namespace {

struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

double max_magnitude(std::span<const Complex> values) {
  double out = 0.0;
  for (const auto& v : values) out = std::max(out, std::abs(v));
  return out;
}

}  // namespace

std::vector<Cluster> cluster_values(std::span<const Complex> values, const Tolerances& tol) {
  const std::size_t n = values.size();
  if (n == 0) return {};
  const double radius = tol.cluster_radius(max_magnitude(values));

  DisjointSet sets(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(values[i] - values[j]) <= radius) sets.unite(i, j);
    }
  }

  std::vector<Cluster> clusters;
  std::vector<std::ptrdiff_t> slot(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = sets.find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<std::ptrdiff_t>(clusters.size());
      clusters.push_back({});
    }
    clusters[static_cast<std::size_t>(slot[root])].members.push_back(i);
  }
  for (auto& c : clusters) {
    Complex sum{0.0, 0.0};
    for (auto idx : c.members) sum += values[idx];
    c.representative = sum / static_cast<double>(c.members.size());
  }
  std::stable_sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
    return lex_less(a.representative, b.representative);
  });
  return clusters;
}

std::vector<Cluster> cluster_values(const CVector& values, const Tolerances& tol) {
  return cluster_values(std::span<const Complex>(values.data(), static_cast<std::size_t>(values.size())), tol);
}

bool clustering_is_marginal(std::span<const Complex> values, const Tolerances& tol) {
  const auto clusters = cluster_values(values, tol);
  const double radius = tol.cluster_radius(max_magnitude(values));
  std::vector<std::size_t> owner(values.size());
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    for (auto idx : clusters[c].members) owner[idx] = c;
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    double nearest_inside = -1.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
      if (i == j) continue;
      const double d = std::abs(values[i] - values[j]);
      if (owner[i] != owner[j]) {
        if (d < 10.0 * radius) return true;
      } else if (nearest_inside < 0.0 || d < nearest_inside) {
        nearest_inside = d;
      }
    }
    if (nearest_inside > 0.1 * radius) return true;
  }
  return false;
}

Complex PolyInLambda::operator()(Complex lambda) const {
  Complex acc{0.0, 0.0};
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * lambda + *it;
  return acc;
}

PolyInLambda det_poly_in_lambda(const CMatrix& a0, const CMatrix& a1, int degree_bound) {
  if (a0.rows() != a0.cols() || a1.rows() != a1.cols() || a0.rows() != a1.rows()) {
    throw DimensionError("det_poly_in_lambda: pencil matrices must be square and equal-sized");
  }
  if (degree_bound < 0) throw InvalidArgument("det_poly_in_lambda: negative degree bound");

  const int points = degree_bound + 1;
  std::vector<Complex> nodes(static_cast<std::size_t>(points));
  std::vector<Complex> samples(static_cast<std::size_t>(points));
  PolyInLambda p;
  p.degree_bound = degree_bound;
  for (int k = 0; k < points; ++k) {
    const Complex z = std::polar(1.0, 2.0 * std::numbers::pi * k / points);
    const CMatrix m = a0 + z * a1;
    nodes[static_cast<std::size_t>(k)] = z;
    samples[static_cast<std::size_t>(k)] = m.rows() == 0 ? Complex{1.0, 0.0} : m.partialPivLu().determinant();
    // the largest row norm stands in for every row, so a nearly vanishing row
    // cannot shrink the reference magnitude
    double widest = 0.0;
    for (Eigen::Index r = 0; r < m.rows(); ++r) widest = std::max(widest, m.row(r).norm());
    p.scale = std::max(p.scale, std::pow(widest, static_cast<double>(m.rows())));
  }

  // Inverse DFT on the roots of unity solves the Vandermonde system exactly.
  p.coefficients.assign(static_cast<std::size_t>(points), Complex{0.0, 0.0});
  for (int d = 0; d < points; ++d) {
    Complex acc{0.0, 0.0};
    for (int k = 0; k < points; ++k) {
      acc += samples[static_cast<std::size_t>(k)] * std::pow(std::conj(nodes[static_cast<std::size_t>(k)]), d);
    }
    p.coefficients[static_cast<std::size_t>(d)] = acc / static_cast<double>(points);
  }
  return p;
}

RootResult poly_roots(const PolyInLambda& p, const Tolerances& tol) {
  RootResult out;
  const double cutoff = tol.pencil_zero_tol * p.scale;
  double largest = 0.0;
  for (const auto& c : p.coefficients) largest = std::max(largest, std::abs(c));
  if (largest <= cutoff) {
    out.degenerate = true;
    out.degeneracy_ratio = cutoff > 0.0 ? largest / cutoff : 0.0;
    return out;
  }
  out.degeneracy_ratio = cutoff > 0.0 ? largest / cutoff : 1e300;

  int degree = static_cast<int>(p.coefficients.size()) - 1;
  while (degree > 0 && std::abs(p.coefficients[static_cast<std::size_t>(degree)]) <= cutoff) --degree;
  if (degree == 0) return out;

  const Complex lead = p.coefficients[static_cast<std::size_t>(degree)];
  CMatrix companion = CMatrix::Zero(degree, degree);
  for (int j = 0; j < degree; ++j) {
    companion(0, j) = -p.coefficients[static_cast<std::size_t>(degree - 1 - j)] / lead;
  }
  for (int i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
  const CVector roots = eigenvalues(companion);
  out.roots.assign(roots.data(), roots.data() + roots.size());
  return out;
}

bool is_symmetric(const RMatrix& g, const Tolerances& tol) {
  if (g.rows() != g.cols()) return false;
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  return (g - g.transpose()).cwiseAbs().maxCoeff() <= tol.rank_rel_tol * scale;
}

bool is_diagonalizable(const CMatrix& g, const Tolerances& tol) {
  require_square(g, "is_diagonalizable");
  if (g.size() == 0) return true;
  if (g.imag().cwiseAbs().maxCoeff() == 0.0 && is_symmetric(g.real(), tol)) return true;

  const CVector values = eigenvalues(g);
  const Eigen::Index n = g.rows();
  for (const auto& cluster : cluster_values(values, tol)) {
    const CMatrix shifted = g - cluster.representative * CMatrix::Identity(n, n);
    const Eigen::Index geometric = n - numerical_rank(shifted, tol);
    if (geometric < static_cast<Eigen::Index>(cluster.members.size())) return false;
  }
  return true;
}

}  // namespace modalnet
