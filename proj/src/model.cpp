#include "modalnet/model.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "modalnet/errors.hpp"

namespace modalnet {

void SubsystemModel::validate() const {
  if (A.rows() < 1 || A.rows() != A.cols()) {
    throw DimensionError("A must be a non-empty square matrix");
  }
  if (B.rows() != A.rows() || B.cols() < 1) {
    std::ostringstream msg;
    msg << "B is " << B.rows() << "x" << B.cols() << ", expected " << A.rows() << " rows and at least one column";
    throw DimensionError(msg.str());
  }
  if (C.rows() != B.cols() || C.cols() != A.rows()) {
    std::ostringstream msg;
    msg << "C is " << C.rows() << "x" << C.cols() << ", expected " << B.cols() << "x" << A.rows();
    throw DimensionError(msg.str());
  }
}

bool GlobalModel::is_actuated(int vertex) const {
  return std::binary_search(actuated.begin(), actuated.end(), vertex);
}

RMatrix GlobalModel::actuation_matrix() const {
  RMatrix s = RMatrix::Zero(N(), M());
  for (int k = 0; k < M(); ++k) s(actuated[static_cast<std::size_t>(k)], k) = 1.0;
  return s;
}

void GlobalModel::validate() {
  if (G.rows() < 1 || G.rows() != G.cols()) {
    throw DimensionError("G must be a non-empty square matrix");
  }
  std::sort(actuated.begin(), actuated.end());
  for (std::size_t k = 0; k < actuated.size(); ++k) {
    if (actuated[k] < 0 || actuated[k] >= N()) {
      throw IndexError("actuated index " + std::to_string(actuated[k]) + " outside [0, " +
                       std::to_string(N()) + ")");
    }
    if (k > 0 && actuated[k] == actuated[k - 1]) {
      throw IndexError("actuated index " + std::to_string(actuated[k]) + " listed twice");
    }
  }
}

namespace {

using nlohmann::json;

const json& field(const json& doc, const char* name) {
  auto it = doc.find(name);
  if (it == doc.end()) throw ParseError(std::string("missing field '") + name + "'");
  return *it;
}

int integer_field(const json& doc, const char* name) {
  const json& v = field(doc, name);
  if (!v.is_number_integer()) throw ParseError(std::string("field '") + name + "' must be an integer");
  return v.get<int>();
}

RMatrix matrix_field(const json& doc, const char* name) {
  const json& v = field(doc, name);
  if (!v.is_array() || v.empty()) {
    throw ParseError(std::string("field '") + name + "' must be a non-empty array of rows");
  }
  const std::size_t rows = v.size();
  std::size_t cols = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const json& row = v[r];
    if (!row.is_array()) {
      throw ParseError(std::string("field '") + name + "': row " + std::to_string(r) + " is not an array");
    }
    if (r == 0) cols = row.size();
    if (row.size() != cols || cols == 0) {
      throw DimensionError(std::string("field '") + name + "': row " + std::to_string(r) + " has " +
                           std::to_string(row.size()) + " entries, expected " + std::to_string(cols));
    }
  }
  RMatrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const json& x = v[r][c];
      if (!x.is_number()) {
        throw ParseError(std::string("field '") + name + "': entry (" + std::to_string(r) + ", " +
                         std::to_string(c) + ") is not a number");
      }
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = x.get<double>();
    }
  }
  return out;
}

json matrix_json(const RMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

void expect_dim(const char* what, Eigen::Index got, int declared) {
  if (got != declared) {
    std::ostringstream msg;
    msg << what << " has " << got << ", declared " << declared;
    throw DimensionError(msg.str());
  }
}

Tolerances parse_tolerances(const json& doc) {
  Tolerances tol;
  if (!doc.is_object()) throw ParseError("field 'tolerances' must be an object");
  auto number = [&](const char* key, double& slot) {
    if (auto it = doc.find(key); it != doc.end()) {
      if (!it->is_number()) throw ParseError(std::string("tolerances.") + key + " must be a number");
      slot = it->get<double>();
    }
  };
  number("eig_cluster_tol", tol.eig_cluster_tol);
  number("rank_rel_tol", tol.rank_rel_tol);
  number("pencil_zero_tol", tol.pencil_zero_tol);
  if (auto it = doc.find("sample_count"); it != doc.end()) {
    if (!it->is_number_integer()) throw ParseError("tolerances.sample_count must be an integer");
    tol.sample_count = it->get<int>();
  }
  if (auto it = doc.find("rng_seed"); it != doc.end()) {
    if (!it->is_number_integer()) throw ParseError("tolerances.rng_seed must be an integer");
    tol.rng_seed = it->get<std::uint64_t>();
  }
  tol.validate();
  return tol;
}

}  // namespace

Network parse_network(const json& doc) {
  if (!doc.is_object()) throw ParseError("model file must contain a JSON object");
  Network net;
  const int n = integer_field(doc, "n");
  const int m = integer_field(doc, "m");
  const int N = integer_field(doc, "N");
  if (n < 1 || m < 1 || N < 1) throw DimensionError("n, m and N must be positive");

  net.subsystem.A = matrix_field(doc, "A");
  net.subsystem.B = matrix_field(doc, "B");
  net.subsystem.C = matrix_field(doc, "C");
  net.global.G = matrix_field(doc, "G");

  expect_dim("A rows", net.subsystem.A.rows(), n);
  expect_dim("A columns", net.subsystem.A.cols(), n);
  expect_dim("B rows", net.subsystem.B.rows(), n);
  expect_dim("B columns", net.subsystem.B.cols(), m);
  expect_dim("C rows", net.subsystem.C.rows(), m);
  expect_dim("C columns", net.subsystem.C.cols(), n);
  expect_dim("G rows", net.global.G.rows(), N);
  expect_dim("G columns", net.global.G.cols(), N);
  net.subsystem.validate();

  const json& act = field(doc, "actuated");
  if (!act.is_array()) throw ParseError("field 'actuated' must be an array of integers");
  for (const auto& x : act) {
    if (!x.is_number_integer()) throw ParseError("field 'actuated' must contain integers only");
    net.global.actuated.push_back(x.get<int>());
  }
  net.global.validate();

  if (auto it = doc.find("tolerances"); it != doc.end()) net.tolerances = parse_tolerances(*it);
  if (auto it = doc.find("C_hat"); it != doc.end()) {
    RMatrix c_hat = matrix_field(doc, "C_hat");
    expect_dim("C_hat columns", c_hat.cols(), n);
    net.C_hat = std::move(c_hat);
  }
  return net;
}

Network load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return parse_network(doc);
}

json to_json(const Network& net) {
  json doc;
  doc["n"] = net.subsystem.n();
  doc["m"] = net.subsystem.m();
  doc["N"] = net.global.N();
  doc["A"] = matrix_json(net.subsystem.A);
  doc["B"] = matrix_json(net.subsystem.B);
  doc["C"] = matrix_json(net.subsystem.C);
  doc["G"] = matrix_json(net.global.G);
  doc["actuated"] = net.global.actuated;
  json tol;
  tol["eig_cluster_tol"] = net.tolerances.eig_cluster_tol;
  tol["rank_rel_tol"] = net.tolerances.rank_rel_tol;
  tol["pencil_zero_tol"] = net.tolerances.pencil_zero_tol;
  if (net.tolerances.sample_count) tol["sample_count"] = *net.tolerances.sample_count;
  tol["rng_seed"] = net.tolerances.rng_seed;
  doc["tolerances"] = std::move(tol);
  if (net.C_hat) doc["C_hat"] = matrix_json(*net.C_hat);
  return doc;
}

std::vector<std::string> lint(const Network& net) {
  std::vector<std::string> warnings;
  const RMatrix& g = net.global.G;
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      if (i != j && g(i, j) < 0.0) {
        warnings.push_back("G is not essentially nonnegative off the diagonal (g[" + std::to_string(i) + "][" +
                           std::to_string(j) + "] < 0); results do not assume a diffusive model");
        return warnings;
      }
    }
  }
  return warnings;
}

AssembledSystem assemble(const Network& net) {
  const auto& sub = net.subsystem;
  const int N = net.global.N();
  AssembledSystem out;
  out.state = kron(RMatrix::Identity(N, N), sub.A) + kron(net.global.G, sub.coupling());
  out.input = kron(net.global.actuation_matrix(), sub.B);
  return out;
}

bool DiGraph::has_edge(int from, int to) const {
  return std::binary_search(edges.begin(), edges.end(), std::pair{from, to});
}

DiGraph build_graph(const Network& net) {
  const RMatrix& g = net.global.G;
  DiGraph graph;
  graph.vertex_count = static_cast<int>(g.rows());
  graph.in_neighbors.resize(static_cast<std::size_t>(graph.vertex_count));
  for (int j = 0; j < graph.vertex_count; ++j) {
    for (int i = 0; i < graph.vertex_count; ++i) {
      if (i != j && g(i, j) != 0.0) {
        graph.edges.emplace_back(j, i);
        graph.in_neighbors[static_cast<std::size_t>(i)].push_back(j);
      }
    }
  }
  return graph;
}

CMatrix GlobalSpectrum::cluster_rows(std::size_t c) const {
  const auto& members = distinct.at(c).members;
  CMatrix rows(static_cast<Eigen::Index>(members.size()), left_eigenvectors.cols());
  for (std::size_t k = 0; k < members.size(); ++k) {
    rows.row(static_cast<Eigen::Index>(k)) = left_eigenvectors.row(static_cast<Eigen::Index>(members[k]));
  }
  return rows;
}

GlobalSpectrum global_spectrum(const Network& net) {
  const RMatrix& g = net.global.G;
  const Tolerances& tol = net.tolerances;
  const Eigen::Index N = g.rows();

  CVector raw;
  // Orthonormal eigenvectors are exact left eigenvectors when G is symmetric.
  std::optional<RMatrix> symmetric_vectors;
  if (is_symmetric(g, tol)) {
    Eigen::SelfAdjointEigenSolver<RMatrix> solver(0.5 * (g + g.transpose()));
    if (solver.info() != Eigen::Success) throw ConvergenceFailure("symmetric eigensolver did not converge");
    raw = solver.eigenvalues().cast<Complex>();
    symmetric_vectors = solver.eigenvectors();
  } else {
    raw = eigenvalues(g.cast<Complex>());
  }

  GlobalSpectrum out;
  out.distinct = cluster_values(raw, tol);
  out.cluster_marginal =
      clustering_is_marginal(std::span<const Complex>(raw.data(), static_cast<std::size_t>(raw.size())), tol);
  out.eigenvalues.resize(N);
  out.left_eigenvectors.resize(N, N);

  // Renumber so that cluster members are contiguous and in cluster order.
  Eigen::Index next = 0;
  for (auto& cluster : out.distinct) {
    const auto k = static_cast<Eigen::Index>(cluster.members.size());
    CMatrix basis;
    if (symmetric_vectors) {
      basis.resize(k, N);
      for (Eigen::Index r = 0; r < k; ++r) {
        basis.row(r) = symmetric_vectors->col(static_cast<Eigen::Index>(cluster.members[static_cast<std::size_t>(r)]))
                           .transpose()
                           .cast<Complex>();
      }
    } else {
      const CMatrix shifted = g.cast<Complex>() - cluster.representative * CMatrix::Identity(N, N);
      basis = left_null_basis(shifted, tol);
      if (basis.rows() < k) {
        std::ostringstream msg;
        msg << "defective network matrix: eigenvalue " << cluster.representative.real();
        if (cluster.representative.imag() != 0.0) msg << (cluster.representative.imag() < 0 ? "-" : "+")
                                                      << std::abs(cluster.representative.imag()) << "i";
        msg << " has algebraic multiplicity " << k << " but only " << basis.rows()
            << " independent eigenvector(s)";
        throw DefectiveNetworkMatrix(msg.str());
      }
      basis.conservativeResize(k, N);
    }
    std::vector<std::size_t> renumbered;
    for (Eigen::Index r = 0; r < k; ++r) {
      out.eigenvalues(next) = cluster.representative;
      out.left_eigenvectors.row(next) = basis.row(r);
      renumbered.push_back(static_cast<std::size_t>(next));
      ++next;
    }
    cluster.members = std::move(renumbered);
  }
  return out;
}

}  // namespace modalnet
