#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "modalnet/linalg.hpp"

namespace modalnet {

/// Local dynamics (C, A, B) shared by every node: A is n x n, B is n x m,
/// C is m x n.
struct SubsystemModel {
  RMatrix A;
  RMatrix B;
  RMatrix C;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  RMatrix coupling() const { return B * C; }

  /// Throws DimensionError on inconsistent sizes or n, m < 1.
  void validate() const;
};

/// Interconnection weights G (N x N) and the 0-based actuated node indices.
struct GlobalModel {
  RMatrix G;
  std::vector<int> actuated;

  int N() const { return static_cast<int>(G.rows()); }
  int M() const { return static_cast<int>(actuated.size()); }
  bool is_actuated(int vertex) const;
  /// N x M indicator matrix with a single 1 per column.
  RMatrix actuation_matrix() const;

  /// Sorts actuated indices; throws DimensionError or IndexError.
  void validate();
};

struct Network {
  SubsystemModel subsystem;
  GlobalModel global;
  Tolerances tolerances;
  /// Fixed measurement map for protocol design, when the file supplies one.
  std::optional<RMatrix> C_hat;
};

/// Parses the model-file JSON object. Throws ParseError, DimensionError,
/// IndexError or InvalidArgument.
Network parse_network(const nlohmann::json& doc);
Network load_network(const std::filesystem::path& path);
nlohmann::json to_json(const Network& net);

/// Warnings for users expecting diffusive models (negative off-diagonal
/// coupling weights). Never fatal.
std::vector<std::string> lint(const Network& net);

struct AssembledSystem {
  RMatrix state;  // I_N (x) A + G (x) BC
  RMatrix input;  // S (x) B
};

AssembledSystem assemble(const Network& net);

/// Interaction digraph: an edge j -> i whenever g_ij != 0 exactly, i != j.
struct DiGraph {
  int vertex_count = 0;
  /// (from, to) pairs sorted lexicographically.
  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<int>> in_neighbors;

  bool has_edge(int from, int to) const;
};

DiGraph build_graph(const Network& net);

struct GlobalSpectrum {
  /// lambda_1..lambda_N with multiplicity; members of a cluster share its
  /// representative value exactly.
  CVector eigenvalues;
  /// Row j is v_j^T, paired with eigenvalues(j). Rows belonging to one
  /// cluster form an orthonormal basis of its left eigenspace.
  CMatrix left_eigenvectors;
  /// Clusters of distinct eigenvalues; members index into `eigenvalues`.
  std::vector<Cluster> distinct;
  bool diagonalizable = true;
  bool cluster_marginal = false;

  /// Rows of left_eigenvectors for cluster c.
  CMatrix cluster_rows(std::size_t c) const;
};

/// Throws DefectiveNetworkMatrix when some eigenvalue of G has fewer
/// independent left eigenvectors than its multiplicity.
GlobalSpectrum global_spectrum(const Network& net);

}  // namespace modalnet
