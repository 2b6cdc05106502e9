#include "modalnet/controllability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "modalnet/errors.hpp"

namespace modalnet {

PbhResult pbh_controllable(const CMatrix& f, const CMatrix& b, const Tolerances& tol) {
  if (f.rows() != f.cols() || b.rows() != f.rows()) {
    throw DimensionError("pbh_controllable: F must be square with as many rows as B");
  }
  const Eigen::Index n = f.rows();
  PbhResult out;
  for (const auto& cluster : cluster_values(eigenvalues(f), tol)) {
    CMatrix pencil(n, n + b.cols());
    pencil << f - cluster.representative * CMatrix::Identity(n, n), b;
    const RankMargin margin = rank_margin(pencil, tol);
    out.marginal = out.marginal || margin.marginal();
    if (margin.rank < n) {
      out.controllable = false;
      out.uncontrollable_modes.push_back(cluster.representative);
    }
  }
  return out;
}

PbhResult pbh_observable(const CMatrix& c, const CMatrix& f, const Tolerances& tol) {
  return pbh_controllable(f.transpose(), c.transpose(), tol);
}

ModalTestResult modal_test(const Network& net, const GlobalSpectrum& gs, const ModeCatalog& catalog) {
  if (!gs.diagonalizable) throw DefectiveNetworkMatrix("modal test requires a diagonalizable network matrix");
  const Tolerances& tol = net.tolerances;
  const CMatrix s = net.global.actuation_matrix().cast<Complex>();
  const CMatrix b = net.subsystem.B.cast<Complex>();
  const double scale = spectral_norm(b);
  const Eigen::Index width = s.cols() * b.cols();

  ModalTestResult out;
  for (const auto& record : catalog.records) {
    std::vector<CMatrix> pieces;
    Eigen::Index rows = 0;
    for (const auto& block : record.blocks) {
      const CMatrix vs = gs.cluster_rows(block.block) * s;
      const CMatrix wb = block.left_vectors * b;
      pieces.push_back(kron(vs, wb));
      rows += pieces.back().rows();
    }
    CMatrix stack(rows, width);
    Eigen::Index at = 0;
    for (const auto& p : pieces) {
      stack.middleRows(at, p.rows()) = p;
      at += p.rows();
    }
    const RankMargin margin = rank_margin(stack, tol, scale);
    out.marginal = out.marginal || margin.marginal();
    if (margin.rank < rows && out.controllable) {
      out.controllable = false;
      out.witness = record.mu;
      out.witness_rows = static_cast<int>(rows);
      out.witness_rank = margin.rank;
    }
  }
  return out;
}

std::vector<MultiplicityViolation> multiplicity_bound(const ModeCatalog& catalog, int M, int m) {
  std::vector<MultiplicityViolation> out;
  for (const auto& record : catalog.records) {
    if (M * m < record.total_geometric) out.push_back({record.mu, record.total_geometric, M * m});
  }
  return out;
}

bool distinct_block_disjointness(const ModeCatalog& catalog, const GlobalSpectrum& /*gs*/) {
  // Catalog blocks are already keyed by distinct lambda clusters.
  return std::all_of(catalog.records.begin(), catalog.records.end(),
                     [](const ModeRecord& r) { return r.blocks.size() <= 1; });
}

ActuationBound invariant_actuation_bound(const ModeCatalog& catalog, int N, int M, int m) {
  ActuationBound out;
  out.required = (N + m - 1) / m;
  out.actuated = M;
  out.applies = catalog.has_invariant_modes();
  out.ok = !out.applies || M >= out.required;
  return out;
}

std::optional<ProjectionFixedRequirement> projection_fixed_requirement(const ModeCatalog& catalog, int N, int M) {
  for (auto idx : catalog.invariant_modes) {
    if (catalog.records[idx].projection_fixed) return ProjectionFixedRequirement{M == N};
  }
  return std::nullopt;
}

PartitionCheck partition_check(const Network& net, const DiGraph& graph, std::span<const int> subset) {
  if (subset.empty()) throw EmptySubset("partition subset must be nonempty");
  PartitionCheck out;
  out.subset.assign(subset.begin(), subset.end());
  std::sort(out.subset.begin(), out.subset.end());
  std::vector<bool> inside(static_cast<std::size_t>(graph.vertex_count), false);
  for (std::size_t k = 0; k < out.subset.size(); ++k) {
    const int v = out.subset[k];
    if (v < 0 || v >= graph.vertex_count) throw IndexError("subset vertex " + std::to_string(v) + " out of range");
    if (k > 0 && out.subset[k - 1] == v) throw IndexError("subset vertex " + std::to_string(v) + " repeated");
    inside[static_cast<std::size_t>(v)] = true;
  }

  out.n_hat = static_cast<int>(out.subset.size());
  for (int v : out.subset) {
    if (net.global.is_actuated(v)) {
      ++out.m_hat;
      continue;
    }
    const auto& preds = graph.in_neighbors[static_cast<std::size_t>(v)];
    if (std::any_of(preds.begin(), preds.end(), [&](int u) { return !inside[static_cast<std::size_t>(u)]; })) {
      ++out.b;
    }
  }
  const int m = net.subsystem.m();
  out.bound = (out.n_hat + m - 1) / m - out.b;
  out.satisfied = out.m_hat >= out.bound;
  return out;
}

namespace {

constexpr std::uint64_t kPartitionBudget = std::uint64_t{1} << 20;

std::uint64_t subset_count(int n, int cap) {
  std::uint64_t total = 0;
  std::uint64_t choose = 1;  // C(n, 0)
  for (int k = 1; k <= cap; ++k) {
    // C(n, k) = C(n, k-1) * (n - k + 1) / k, saturating past the budget.
    if (choose > kPartitionBudget) return kPartitionBudget + 1;
    choose = choose * static_cast<std::uint64_t>(n - k + 1) / static_cast<std::uint64_t>(k);
    total += choose;
    if (total > kPartitionBudget) return total;
  }
  return total;
}

}  // namespace

std::vector<PartitionCheck> partition_scan(const Network& net, const DiGraph& graph,
                                           std::optional<int> max_subset_size) {
  const int n = graph.vertex_count;
  const int cap = std::clamp(max_subset_size.value_or(n), 1, n);
  if (subset_count(n, cap) > kPartitionBudget) {
    throw BudgetExceeded("partition scan would enumerate more than 2^20 subsets; pass --max-subset-size or --subset");
  }

  std::vector<PartitionCheck> violations;
  std::vector<int> current;
  // Depth-first enumeration of all combinations of size <= cap.
  auto visit = [&](auto&& self, int start) -> void {
    for (int v = start; v < n; ++v) {
      current.push_back(v);
      PartitionCheck check = partition_check(net, graph, current);
      if (!check.satisfied) violations.push_back(std::move(check));
      if (static_cast<int>(current.size()) < cap) self(self, v + 1);
      current.pop_back();
    }
  };
  visit(visit, 0);

  std::sort(violations.begin(), violations.end(), [](const PartitionCheck& a, const PartitionCheck& b) {
    if (a.deficit() != b.deficit()) return a.deficit() > b.deficit();
    return a.subset < b.subset;
  });
  return violations;
}

namespace {

double operator_norm(const RMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<RMatrix> gram(m.transpose() * m, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, gram.eigenvalues().maxCoeff()));
}

struct KrylovBasis {
  RMatrix q;
  double cutoff_ratio_min = std::numeric_limits<double>::infinity();
  double dropped_ratio_max = 0.0;

  // Appends the part of x orthogonal to q whose singular values exceed cutoff;
  // returns the new orthonormal columns.
  RMatrix extend(RMatrix x, double cutoff) {
    if (q.cols() > 0) {
      for (int pass = 0; pass < 2; ++pass) x -= q * (q.transpose() * x);
    }
    if (x.cols() == 0 || cutoff <= 0.0) return RMatrix(q.rows(), 0);
    Eigen::JacobiSVD<RMatrix> svd(x, Eigen::ComputeThinU);
    const Eigen::VectorXd& s = svd.singularValues();
    Eigen::Index keep = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) > cutoff) {
        ++keep;
        cutoff_ratio_min = std::min(cutoff_ratio_min, s(i) / cutoff);
      } else {
        dropped_ratio_max = std::max(dropped_ratio_max, s(i) / cutoff);
      }
    }
    keep = std::min<Eigen::Index>(keep, q.rows() - q.cols());
    RMatrix fresh = svd.matrixU().leftCols(keep);
    if (q.cols() > 0) fresh -= q * (q.transpose() * fresh);
    if (keep > 0) {
      Eigen::HouseholderQR<RMatrix> qr(fresh);
      fresh = qr.householderQ() * RMatrix::Identity(fresh.rows(), keep);
    }
    RMatrix grown(q.rows(), q.cols() + keep);
    grown << q, fresh;
    q = std::move(grown);
    return fresh;
  }
};

}  // namespace

OracleResult kalman_rank(const Network& net) {
  const int dimension = net.global.N() * net.subsystem.n();
  if (dimension > kOracleMaxDimension) {
    throw ScaleLimit("Kalman oracle limited to " + std::to_string(kOracleMaxDimension) + " states, model has " +
                     std::to_string(dimension));
  }
  const AssembledSystem sys = assemble(net);
  const double rel = net.tolerances.rank_rel_tol;

  KrylovBasis basis;
  basis.q.resize(dimension, 0);
  RMatrix frontier = basis.extend(sys.input, rel * operator_norm(sys.input));
  const double step_cutoff = rel * operator_norm(sys.state);
  while (frontier.cols() > 0 && basis.q.cols() < dimension) {
    frontier = basis.extend(sys.state * frontier, step_cutoff);
  }

  // A Hautus rank drop at an eigenvalue of the assembled matrix certifies that
  // many unreachable directions. The recursion above can overshoot when a
  // reachable and an unreachable part share an eigenvalue, which needs a
  // cluster of two or more; the certified count caps the rank.
  const CMatrix f = sys.state.cast<Complex>();
  const CMatrix b = sys.input.cast<Complex>();
  int certified_unreachable = 0;
  bool hautus_marginal = false;
  for (const auto& cluster : cluster_values(eigenvalues(f), net.tolerances)) {
    if (cluster.members.size() < 2) continue;
    CMatrix pencil(dimension, dimension + b.cols());
    pencil << f - cluster.representative * CMatrix::Identity(dimension, dimension), b;
    const RankMargin margin = rank_margin(pencil, net.tolerances);
    hautus_marginal = hautus_marginal || margin.marginal();
    certified_unreachable += std::min(dimension - margin.rank, static_cast<int>(cluster.members.size()));
  }

  OracleResult out;
  out.dimension = dimension;
  out.rank = std::min(static_cast<int>(basis.q.cols()), dimension - certified_unreachable);
  out.marginal = basis.cutoff_ratio_min < 10.0 || basis.dropped_ratio_max > 0.1 || hautus_marginal;
  return out;
}

namespace {

std::string list_modes(const std::vector<Complex>& modes) {
  std::string out;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (i) out += ", ";
    out += format_complex(modes[i]);
  }
  return out;
}

const char* mode_kind(const ModeCatalog& catalog, Complex mu) {
  for (const auto& r : catalog.records) {
    if (r.mu == mu) return r.classification == ModeClass::NetworkInvariant ? "network-invariant" : "special-repeat";
  }
  return "special-repeat";
}

}  // namespace

ControllabilityReport analyze(const Network& net, const AnalyzeOptions& options) {
  const auto& sub = net.subsystem;
  const auto& tol = net.tolerances;
  ControllabilityReport report;
  report.n = sub.n();
  report.m = sub.m();
  report.N = net.global.N();
  report.M = net.global.M();
  report.warnings = lint(net);

  report.global = global_spectrum(net);
  const GlobalSpectrum& gs = report.global;
  const CMatrix a = sub.A.cast<Complex>();
  const CMatrix b = sub.B.cast<Complex>();
  const CMatrix bc = sub.coupling().cast<Complex>();

  bool marginal = gs.cluster_marginal;
  const PbhResult local = pbh_controllable(a, b, tol);
  report.subsystem_controllable = local.controllable;
  report.subsystem_uncontrollable_modes = local.uncontrollable_modes;
  const PbhResult observable = pbh_observable(sub.C.cast<Complex>(), a, tol);
  report.subsystem_observable = observable.controllable;
  const PbhResult global =
      pbh_controllable(net.global.G.cast<Complex>(), net.global.actuation_matrix().cast<Complex>(), tol);
  report.global_controllable = global.controllable;
  marginal = marginal || local.marginal || global.marginal;

  std::vector<Complex> failing_blocks;
  for (const auto& cluster : gs.distinct) {
    const PbhResult r = pbh_controllable(a + cluster.representative * bc, b, tol);
    marginal = marginal || r.marginal;
    report.per_block_controllable.emplace_back(cluster.representative, r.controllable);
    if (!r.controllable) failing_blocks.push_back(cluster.representative);
  }

  report.mode_catalog = shared_mode_catalog(net, gs);
  const ModeCatalog& catalog = report.mode_catalog;
  marginal = marginal || catalog.cluster_marginal || catalog.degeneracy_marginal;
  report.modal = modal_test(net, gs, catalog);
  marginal = marginal || report.modal.marginal;
  report.multiplicity_violations = multiplicity_bound(catalog, report.M, report.m);
  report.blocks_disjoint = distinct_block_disjointness(catalog, gs);
  report.actuation_bound = invariant_actuation_bound(catalog, report.N, report.M, report.m);
  report.projection_fixed_requirement = projection_fixed_requirement(catalog, report.N, report.M);

  for (const auto& dfm : catalog.dfm_modes) {
    const double radius = tol.cluster_radius(std::abs(dfm));
    const bool contained = std::any_of(catalog.invariant_modes.begin(), catalog.invariant_modes.end(),
                                       [&](std::size_t i) { return std::abs(catalog.records[i].mu - dfm) <= radius; });
    if (!contained) {
      report.warnings.push_back("decentralized fixed mode " + format_complex(dfm) +
                                " was not certified network-invariant (randomized test false positive?)");
    }
  }

  if (catalog.has_invariant_modes()) {
    if (report.N <= 20 || options.max_subset_size) {
      try {
        report.partition_violations = partition_scan(net, build_graph(net), options.max_subset_size);
        report.partition_scanned = true;
      } catch (const BudgetExceeded& e) {
        report.warnings.emplace_back(std::string("partition scan skipped: ") + e.what());
      }
    } else {
      report.warnings.emplace_back("partition scan skipped for N > 20; use the partition command with --subset");
    }
  }

  // Reasons in precedence order: necessary conditions before the modal test.
  auto add = [&](std::string kind, std::string message, std::optional<Complex> mu = std::nullopt) {
    report.reasons.push_back({std::move(kind), std::move(message), mu});
  };
  if (!report.subsystem_controllable) {
    add("subsystem_uncontrollable",
        "subsystem pair (A, B) is uncontrollable at " + list_modes(local.uncontrollable_modes),
        local.uncontrollable_modes.front());
  }
  if (!report.global_controllable) {
    add("global_uncontrollable", "global pair (G, S) is uncontrollable at " + list_modes(global.uncontrollable_modes),
        global.uncontrollable_modes.front());
  }
  if (!failing_blocks.empty()) {
    add("block_uncontrollable", "pair (A + lambda BC, B) is uncontrollable for lambda = " + list_modes(failing_blocks),
        failing_blocks.front());
  }
  for (const auto& v : report.multiplicity_violations) {
    std::ostringstream msg;
    msg << mode_kind(catalog, v.mu) << " mode μ=" << format_complex(v.mu) << " has P(μ)=" << v.total_geometric
        << " > M·m=" << v.available_inputs;
    add("multiplicity_bound", msg.str(), v.mu);
  }
  if (!report.actuation_bound.ok) {
    std::ostringstream msg;
    msg << "network-invariant modes require at least ceil(N/m)=" << report.actuation_bound.required
        << " actuated subsystems, M=" << report.M;
    add("actuation_bound", msg.str());
  }
  if (report.projection_fixed_requirement && !report.projection_fixed_requirement->ok) {
    std::ostringstream msg;
    msg << "projection-fixed network-invariant mode requires actuation at all N=" << report.N
        << " subsystems, M=" << report.M;
    add("projection_fixed", msg.str());
  }
  if (!report.partition_violations.empty()) {
    const auto& worst = report.partition_violations.front();
    std::ostringstream msg;
    msg << report.partition_violations.size() << " vertex subset(s) violate the partition bound; worst {";
    for (std::size_t i = 0; i < worst.subset.size(); ++i) msg << (i ? "," : "") << worst.subset[i];
    msg << "} needs " << worst.bound << " actuated, has " << worst.m_hat;
    add("partition_bound", msg.str());
  }
  if (!report.modal.controllable) {
    std::ostringstream msg;
    msg << mode_kind(catalog, *report.modal.witness) << " mode μ=" << format_complex(*report.modal.witness)
        << " fails the modal test (" << report.modal.witness_rows << " eigenvector rows, rank "
        << report.modal.witness_rank << ")";
    add("modal_test", msg.str(), report.modal.witness);
  }
  report.verdict = report.reasons.empty() ? Verdict::Controllable : Verdict::Uncontrollable;

  if (options.run_oracle && report.N * report.n <= kOracleMaxDimension) {
    report.oracle = kalman_rank(net);
    report.oracle_agrees = report.oracle->controllable() == (report.verdict == Verdict::Controllable);
    marginal = marginal || report.oracle->marginal;
    if (!*report.oracle_agrees) {
      report.warnings.emplace_back("modal verdict disagrees with the Kalman-rank oracle");
    }
  }
  report.tolerance_marginal = marginal;
  if (marginal) report.warnings.emplace_back("some numerical decision is within 10x of its tolerance");
  return report;
}

}  // namespace modalnet
