#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "modalnet/linalg.hpp"
#include "modalnet/model.hpp"
#include "modalnet/modes.hpp"

namespace modalnet {

struct PbhResult {
  bool controllable = true;
  std::vector<Complex> uncontrollable_modes;
  bool marginal = false;
};

/// Hautus test: controllable at mu iff rank [F - mu I | B] = n, checked at
/// every eigenvalue cluster of F.
PbhResult pbh_controllable(const CMatrix& f, const CMatrix& b, const Tolerances& tol);
/// Dual test on (C, F) through (F^T, C^T).
PbhResult pbh_observable(const CMatrix& c, const CMatrix& f, const Tolerances& tol);

struct ModalTestResult {
  bool controllable = true;
  /// First mode whose eigenvector stack is rank deficient.
  std::optional<Complex> witness;
  int witness_rows = 0;
  int witness_rank = 0;
  bool marginal = false;
};

/// Exact test for diagonalizable G: for each distinct mu, the rows
/// (v_j^T S) (x) (w_jl^T B) over every block containing mu must be linearly
/// independent (over the complex field).
ModalTestResult modal_test(const Network& net, const GlobalSpectrum& gs, const ModeCatalog& catalog);

struct MultiplicityViolation {
  Complex mu;
  int total_geometric = 0;
  int available_inputs = 0;  // M * m
};

/// Modes with M*m < P(mu). An empty list certifies nothing.
std::vector<MultiplicityViolation> multiplicity_bound(const ModeCatalog& catalog, int M, int m);

/// True iff no two blocks with distinct lambda share an eigenvalue.
bool distinct_block_disjointness(const ModeCatalog& catalog, const GlobalSpectrum& gs);

struct ActuationBound {
  int required = 0;  // ceil(N / m)
  int actuated = 0;
  bool applies = false;
  bool ok = true;
};

ActuationBound invariant_actuation_bound(const ModeCatalog& catalog, int N, int M, int m);

struct ProjectionFixedRequirement {
  bool ok = true;  // M == N
};

/// Present iff some invariant mode is projection-fixed.
std::optional<ProjectionFixedRequirement> projection_fixed_requirement(const ModeCatalog& catalog, int N, int M);

struct PartitionCheck {
  std::vector<int> subset;
  int n_hat = 0;
  int m_hat = 0;
  /// Non-actuated members with an incoming edge from outside the subset.
  int b = 0;
  int bound = 0;  // ceil(n_hat / m) - b
  bool satisfied = true;

  int deficit() const { return bound - m_hat; }
};

/// Throws EmptySubset, or IndexError for out-of-range or repeated vertices.
PartitionCheck partition_check(const Network& net, const DiGraph& graph, std::span<const int> subset);

/// Every violating subset up to max_subset_size (default N), sorted by
/// decreasing deficit then lexicographically. Throws BudgetExceeded when the
/// enumeration would exceed 2^20 subsets.
std::vector<PartitionCheck> partition_scan(const Network& net, const DiGraph& graph,
                                           std::optional<int> max_subset_size = std::nullopt);

struct OracleResult {
  int rank = 0;
  int dimension = 0;
  bool marginal = false;

  bool controllable() const { return rank == dimension; }
};

inline constexpr int kOracleMaxDimension = 400;

/// Dimension of the reachable subspace of the assembled pair, grown by block
/// Krylov steps with re-orthogonalization, capped by the unreachable
/// directions that Hautus rank drops certify at each eigenvalue cluster.
/// Throws ScaleLimit beyond kOracleMaxDimension states.
OracleResult kalman_rank(const Network& net);

enum class Verdict { Controllable, Uncontrollable };

struct Reason {
  /// subsystem_uncontrollable, global_uncontrollable, block_uncontrollable,
  /// multiplicity_bound, actuation_bound, projection_fixed, partition_bound,
  /// modal_test
  std::string kind;
  std::string message;
  std::optional<Complex> mu;
};

struct ControllabilityReport {
  int n = 0, m = 0, N = 0, M = 0;
  GlobalSpectrum global;
  bool subsystem_controllable = true;
  bool subsystem_observable = true;
  std::vector<Complex> subsystem_uncontrollable_modes;
  bool global_controllable = true;
  /// One entry per distinct eigenvalue of G.
  std::vector<std::pair<Complex, bool>> per_block_controllable;
  ModeCatalog mode_catalog;
  ModalTestResult modal;
  std::vector<MultiplicityViolation> multiplicity_violations;
  bool blocks_disjoint = false;
  ActuationBound actuation_bound;
  std::optional<ProjectionFixedRequirement> projection_fixed_requirement;
  std::vector<PartitionCheck> partition_violations;
  bool partition_scanned = false;
  std::optional<OracleResult> oracle;
  std::optional<bool> oracle_agrees;
  Verdict verdict = Verdict::Controllable;
  std::vector<Reason> reasons;
  std::vector<std::string> warnings;
  /// Some rank, clustering or degeneracy decision sat within 10x of its threshold.
  bool tolerance_marginal = false;
};

struct AnalyzeOptions {
  bool run_oracle = true;
  std::optional<int> max_subset_size;
};

/// Full pipeline. Throws DefectiveNetworkMatrix for defective G.
ControllabilityReport analyze(const Network& net, const AnalyzeOptions& options = {});

}  // namespace modalnet
