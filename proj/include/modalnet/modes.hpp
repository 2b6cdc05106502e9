#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "modalnet/linalg.hpp"
#include "modalnet/model.hpp"

namespace modalnet {

/// Spectrum of A + lambda BC for one distinct eigenvalue lambda of G.
struct BlockSpectrum {
  Complex lambda;
  /// How many eigenvalues of G (counted with multiplicity) share this lambda.
  int multiplicity = 1;
  EigDecomposition eig;
};

/// One decomposition per distinct eigenvalue of G, in the cluster order of
/// the global spectrum. Requires a diagonalizable G.
std::vector<BlockSpectrum> block_spectra(const Network& net, const GlobalSpectrum& gs);

enum class ModeClass { NetworkInvariant, SpecialRepeat };

/// The lambda values for which mu is an eigenvalue of A + lambda BC: either
/// every complex lambda, or a finite set of at most rank(BC) values.
struct RepeatSet {
  bool all_lambda = false;
  std::vector<Complex> values;
  /// Distance of the degeneracy decision from its threshold (see RootResult).
  double degeneracy_ratio = 0.0;
};

struct BlockContribution {
  /// Index into the distinct clusters of the global spectrum.
  std::size_t block = 0;
  Complex lambda;
  int lambda_multiplicity = 1;
  /// Eigenvalues of this block inside the mode's cluster.
  int algebraic = 0;
  /// Geometric multiplicity beta_j(mu); rows of left_vectors.
  int beta = 0;
  CMatrix left_vectors;
};

struct ModeRecord {
  Complex mu;
  std::vector<BlockContribution> blocks;
  /// P(mu): sum of beta over all N eigenvalues of G, counted with multiplicity.
  int total_geometric = 0;
  ModeClass classification = ModeClass::SpecialRepeat;
  RepeatSet repeat_set;
  bool projection_fixed = false;
  std::optional<CRowVector> common_projection;
};

struct ModeCatalog {
  std::vector<ModeRecord> records;
  /// Indices into records of the NetworkInvariant modes.
  std::vector<std::size_t> invariant_modes;
  /// Decentralized fixed modes of the subsystem (randomized test).
  std::vector<Complex> dfm_modes;
  /// Pooled block eigenvalues had a clustering decision near the radius.
  bool cluster_marginal = false;
  /// Some invariance decision sat within 10x of pencil_zero_tol.
  bool degeneracy_marginal = false;

  bool has_invariant_modes() const { return !invariant_modes.empty(); }
};

ModeCatalog shared_mode_catalog(const Network& net, const GlobalSpectrum& gs);

/// mu that are eigenvalues of A + lambda BC for every complex lambda,
/// certified by an identically zero det(mu I - A - lambda BC). The output is
/// independent of the seed: candidates are snapped onto eig(A).
std::vector<Complex> detect_invariant_modes(const SubsystemModel& sub, const Tolerances& tol);

/// Eigenvalues shared by A + BKC for three seeded random diagonal K with
/// entries uniform in [-1, 1]. Advisory: a false positive needs a coincidence
/// across all three draws.
std::vector<Complex> detect_dfm(const SubsystemModel& sub, const Tolerances& tol, std::uint64_t rng_seed);

RepeatSet network_repeat_set(const SubsystemModel& sub, Complex mu, const Tolerances& tol);

struct ProjectionFixedness {
  bool fixed = false;
  /// Unit-norm common direction p, phase-normalized so its largest entry is
  /// real and positive. Absent when the mode is not projection-fixed or all
  /// projections vanish.
  std::optional<CRowVector> direction;
};

/// Whether w(lambda)^T B spans one direction across sampled lambda.
/// Throws NotInvariantMode when mu fails the invariance certificate.
ProjectionFixedness projection_fixed(const SubsystemModel& sub, Complex mu, const Tolerances& tol);

/// Fills classification, repeat_set and projection fields from record.mu.
ModeRecord classify_mode(const SubsystemModel& sub, ModeRecord record, const Tolerances& tol);

}  // namespace modalnet
