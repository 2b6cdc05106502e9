#include "modalnet/modes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/SVD>

#include "modalnet/errors.hpp"
#include "random.hpp"

namespace modalnet {

namespace {

CMatrix block_matrix(const SubsystemModel& sub, Complex lambda) {
  return sub.A.cast<Complex>() + lambda * sub.coupling().cast<Complex>();
}

int coupling_rank(const SubsystemModel& sub, const Tolerances& tol) {
  return numerical_rank(sub.coupling().cast<Complex>(), tol);
}

// det(mu I - A - lambda BC) as a polynomial in lambda, with its root analysis.
RootResult invariance_pencil(const SubsystemModel& sub, Complex mu, const Tolerances& tol) {
  const Eigen::Index n = sub.A.rows();
  const CMatrix a0 = mu * CMatrix::Identity(n, n) - sub.A.cast<Complex>();
  const CMatrix a1 = -sub.coupling().cast<Complex>();
  return poly_roots(det_poly_in_lambda(a0, a1, coupling_rank(sub, tol)), tol);
}

std::vector<Complex> representatives(const CVector& values, const Tolerances& tol) {
  std::vector<Complex> out;
  for (const auto& c : cluster_values(values, tol)) out.push_back(c.representative);
  return out;
}

double max_abs(const std::vector<Complex>& values) {
  double out = 0.0;
  for (const auto& v : values) out = std::max(out, std::abs(v));
  return out;
}

const Complex* nearest(const std::vector<Complex>& pool, Complex target, double radius) {
  const Complex* best = nullptr;
  double best_dist = radius;
  for (const auto& v : pool) {
    const double d = std::abs(v - target);
    if (d <= best_dist) {
      best = &v;
      best_dist = d;
    }
  }
  return best;
}

// Members of one block cluster are a single multiple eigenvalue; a defective
// one splits by about sqrt(eps), while the member mean stays accurate.
std::vector<Complex> collapse_multiple(const CVector& values, const Tolerances& tol) {
  std::vector<Complex> out(static_cast<std::size_t>(values.size()));
  for (const auto& c : cluster_values(values, tol)) {
    for (auto idx : c.members) out[idx] = c.representative;
  }
  return out;
}

CRowVector phase_normalized(CRowVector p) {
  Eigen::Index argmax = 0;
  p.cwiseAbs().maxCoeff(&argmax);
  const Complex lead = p(argmax);
  if (std::abs(lead) > 0.0) p *= std::conj(lead) / std::abs(lead);
  return p.normalized();
}

}  // namespace

std::vector<BlockSpectrum> block_spectra(const Network& net, const GlobalSpectrum& gs) {
  if (!gs.diagonalizable) throw DefectiveNetworkMatrix("block spectra require a diagonalizable network matrix");
  std::vector<BlockSpectrum> out;
  out.reserve(gs.distinct.size());
  for (const auto& cluster : gs.distinct) {
    BlockSpectrum block;
    block.lambda = cluster.representative;
    block.multiplicity = static_cast<int>(cluster.members.size());
    block.eig = eig_full(block_matrix(net.subsystem, block.lambda), net.tolerances);
    out.push_back(std::move(block));
  }
  return out;
}

std::vector<Complex> detect_invariant_modes(const SubsystemModel& sub, const Tolerances& tol) {
  auto engine = detail::make_engine(tol.rng_seed, detail::Stream::kInvariantProbe);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const Complex probe_lambda = std::polar(1.0, phase(engine));

  const auto probe = representatives(eigenvalues(block_matrix(sub, probe_lambda)), tol);
  const auto base = representatives(eigenvalues(sub.A.cast<Complex>()), tol);
  const double radius = tol.cluster_radius(std::max(max_abs(probe), max_abs(base)));

  std::vector<Complex> out;
  for (const auto& candidate : probe) {
    const Complex* anchor = nearest(base, candidate, radius);
    if (anchor == nullptr) continue;
    if (std::find(out.begin(), out.end(), *anchor) != out.end()) continue;
    if (invariance_pencil(sub, *anchor, tol).degenerate) out.push_back(*anchor);
  }
  std::sort(out.begin(), out.end(), lex_less);
  return out;
}

std::vector<Complex> detect_dfm(const SubsystemModel& sub, const Tolerances& tol, std::uint64_t rng_seed) {
  auto engine = detail::make_engine(rng_seed, detail::Stream::kDecentralizedGain);
  std::uniform_real_distribution<double> gain(-1.0, 1.0);
  const int m = sub.m();

  std::vector<std::vector<Complex>> spectra;
  double scale = 0.0;
  for (int draw = 0; draw < 3; ++draw) {
    Eigen::VectorXd k(m);
    for (int i = 0; i < m; ++i) k(i) = gain(engine);
    const RMatrix closed = sub.A + sub.B * k.asDiagonal() * sub.C;
    spectra.push_back(representatives(eigenvalues(closed.cast<Complex>()), tol));
    scale = std::max(scale, max_abs(spectra.back()));
  }
  const double radius = tol.cluster_radius(scale);

  std::vector<Complex> out;
  for (const auto& mu : spectra[0]) {
    if (nearest(spectra[1], mu, radius) && nearest(spectra[2], mu, radius)) out.push_back(mu);
  }
  return out;
}

RepeatSet network_repeat_set(const SubsystemModel& sub, Complex mu, const Tolerances& tol) {
  const RootResult pencil = invariance_pencil(sub, mu, tol);
  RepeatSet out;
  out.degeneracy_ratio = pencil.degeneracy_ratio;
  if (pencil.degenerate) {
    out.all_lambda = true;
    return out;
  }
  for (const auto& c : cluster_values(std::span<const Complex>(pencil.roots), tol)) {
    out.values.push_back(c.representative);
  }
  return out;
}

ProjectionFixedness projection_fixed(const SubsystemModel& sub, Complex mu, const Tolerances& tol) {
  if (!invariance_pencil(sub, mu, tol).degenerate) {
    throw NotInvariantMode("mu is not a network-invariant mode of the subsystem");
  }
  auto engine = detail::make_engine(tol.rng_seed, detail::Stream::kProjectionSamples);
  std::uniform_real_distribution<double> radius_dist(0.5, 1.5);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const int samples = tol.samples_for(coupling_rank(sub, tol));
  const CMatrix b = sub.B.cast<Complex>();

  std::vector<CMatrix> projections;
  Eigen::Index rows = 0;
  for (int k = 0; k < samples; ++k) {
    const Complex lambda = std::polar(radius_dist(engine), phase(engine));
    const CMatrix f = block_matrix(sub, lambda);
    const CVector values = eigenvalues(f);
    const double radius = tol.cluster_radius(values.cwiseAbs().maxCoeff());
    int algebraic = 0;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      if (std::abs(values(i) - mu) <= radius) ++algebraic;
    }
    projections.push_back(left_eigenspace(f, mu, std::max(algebraic, 1), tol) * b);
    rows += projections.back().rows();
  }

  CMatrix stack(rows, b.cols());
  Eigen::Index at = 0;
  for (const auto& p : projections) {
    stack.middleRows(at, p.rows()) = p;
    at += p.rows();
  }

  ProjectionFixedness out;
  const int rank = numerical_rank(stack, tol, spectral_norm(b));
  out.fixed = rank <= 1;
  if (rank == 1) {
    Eigen::JacobiSVD<CMatrix> svd(stack, Eigen::ComputeThinV);
    out.direction = phase_normalized(svd.matrixV().col(0).adjoint());
  }
  return out;
}

ModeRecord classify_mode(const SubsystemModel& sub, ModeRecord record, const Tolerances& tol) {
  record.repeat_set = network_repeat_set(sub, record.mu, tol);
  record.projection_fixed = false;
  record.common_projection.reset();
  if (record.repeat_set.all_lambda) {
    record.classification = ModeClass::NetworkInvariant;
    auto pf = projection_fixed(sub, record.mu, tol);
    record.projection_fixed = pf.fixed;
    record.common_projection = std::move(pf.direction);
  } else {
    record.classification = ModeClass::SpecialRepeat;
  }
  return record;
}

ModeCatalog shared_mode_catalog(const Network& net, const GlobalSpectrum& gs) {
  const auto& sub = net.subsystem;
  const auto& tol = net.tolerances;
  const auto blocks = block_spectra(net, gs);

  ModeCatalog catalog;
  std::vector<Complex> pooled;
  std::vector<std::size_t> owner;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto collapsed = collapse_multiple(blocks[b].eig.values, tol);
    catalog.cluster_marginal = catalog.cluster_marginal || clustering_is_marginal(collapsed, tol);
    pooled.insert(pooled.end(), collapsed.begin(), collapsed.end());
    owner.insert(owner.end(), collapsed.size(), b);
  }
  catalog.cluster_marginal = catalog.cluster_marginal || clustering_is_marginal(pooled, tol);
  for (const auto& cluster : cluster_values(std::span<const Complex>(pooled), tol)) {
    ModeRecord record;
    record.mu = cluster.representative;
    std::vector<int> algebraic(blocks.size(), 0);
    for (auto idx : cluster.members) ++algebraic[owner[idx]];
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      if (algebraic[b] == 0) continue;
      BlockContribution contribution;
      contribution.block = b;
      contribution.lambda = blocks[b].lambda;
      contribution.lambda_multiplicity = blocks[b].multiplicity;
      contribution.algebraic = algebraic[b];
      contribution.left_vectors = left_eigenspace(block_matrix(sub, blocks[b].lambda), record.mu, algebraic[b], tol);
      contribution.beta = static_cast<int>(contribution.left_vectors.rows());
      record.total_geometric += contribution.beta * contribution.lambda_multiplicity;
      record.blocks.push_back(std::move(contribution));
    }
    record = classify_mode(sub, std::move(record), tol);
    const double ratio = record.repeat_set.degeneracy_ratio;
    if (ratio > 0.1 && ratio < 10.0) catalog.degeneracy_marginal = true;
    if (record.classification == ModeClass::NetworkInvariant) catalog.invariant_modes.push_back(catalog.records.size());
    catalog.records.push_back(std::move(record));
  }
  catalog.dfm_modes = detect_dfm(sub, tol, tol.rng_seed);
  return catalog;
}

}  // namespace modalnet
