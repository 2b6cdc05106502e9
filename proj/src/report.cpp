#include "modalnet/report.hpp"

#include <sstream>

namespace modalnet {

using nlohmann::json;

json complex_json(Complex z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

Complex complex_from_json(const json& j) { return {j.at("re").get<double>(), j.at("im").get<double>()}; }

json matrix_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
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

namespace {

json complex_list(const std::vector<Complex>& values) {
  json out = json::array();
  for (const auto& v : values) out.push_back(complex_json(v));
  return out;
}

json complex_list(const CVector& values) {
  json out = json::array();
  for (Eigen::Index i = 0; i < values.size(); ++i) out.push_back(complex_json(values(i)));
  return out;
}

const char* class_name(ModeClass c) {
  return c == ModeClass::NetworkInvariant ? "network_invariant" : "special_repeat";
}

std::string join_modes(const std::vector<Complex>& modes) {
  std::string out;
  for (std::size_t i = 0; i < modes.size(); ++i) out += (i ? ", " : "") + format_complex(modes[i]);
  return out;
}

}  // namespace

json to_json(const ModeCatalog& catalog) {
  json records = json::array();
  for (const auto& r : catalog.records) {
    json blocks = json::array();
    for (const auto& b : r.blocks) {
      blocks.push_back({{"lambda", complex_json(b.lambda)},
                        {"lambda_multiplicity", b.lambda_multiplicity},
                        {"algebraic", b.algebraic},
                        {"beta", b.beta},
                        {"left_vectors", matrix_json(b.left_vectors)}});
    }
    json rec = {{"mu", complex_json(r.mu)},
                {"classification", class_name(r.classification)},
                {"total_geometric", r.total_geometric},
                {"blocks", std::move(blocks)}};
    if (r.repeat_set.all_lambda) {
      rec["repeat_set"] = "all";
    } else {
      rec["repeat_set"] = complex_list(r.repeat_set.values);
    }
    if (r.classification == ModeClass::NetworkInvariant) {
      rec["projection_fixed"] = r.projection_fixed;
      rec["common_projection"] = r.common_projection ? matrix_json(CMatrix(*r.common_projection)).at(0) : json(nullptr);
    }
    records.push_back(std::move(rec));
  }
  json invariant = json::array();
  for (auto idx : catalog.invariant_modes) invariant.push_back(complex_json(catalog.records[idx].mu));
  return {{"records", std::move(records)},
          {"invariant_modes", std::move(invariant)},
          {"dfm_modes", complex_list(catalog.dfm_modes)},
          {"cluster_marginal", catalog.cluster_marginal},
          {"degeneracy_marginal", catalog.degeneracy_marginal}};
}

json to_json(const PartitionCheck& check) {
  return {{"subset", check.subset}, {"n_hat", check.n_hat}, {"m_hat", check.m_hat},
          {"b", check.b},           {"bound", check.bound}, {"satisfied", check.satisfied}};
}

json to_json(const OracleResult& oracle) {
  return {{"kalman_rank", oracle.rank},
          {"full_rank_needed", oracle.dimension},
          {"controllable", oracle.controllable()},
          {"marginal", oracle.marginal}};
}

json to_json(const ProtocolCertificate& cert) {
  return {{"spectrum_A", complex_list(cert.spectrum_open)},
          {"spectrum_closed", complex_list(cert.spectrum_closed)},
          {"min_separation", cert.min_separation},
          {"required_separation", cert.required_separation},
          {"invariant_modes_after", complex_list(cert.invariant_modes_after)},
          {"passed", cert.passed()}};
}

json to_json(const ProtocolDesign& design) {
  return {{"C_hat", matrix_json(design.C_hat)},
          {"H", matrix_json(design.H)},
          {"tries", design.tries},
          {"certificate", to_json(design.certificate)}};
}

json to_json(const ControllabilityReport& report) {
  json per_block = json::array();
  for (const auto& [lambda, ok] : report.per_block_controllable) {
    per_block.push_back({{"lambda", complex_json(lambda)}, {"controllable", ok}});
  }
  json modal = {{"controllable", report.modal.controllable}, {"marginal", report.modal.marginal}};
  if (report.modal.witness) {
    modal["witness"] = complex_json(*report.modal.witness);
    modal["rows"] = report.modal.witness_rows;
    modal["rank"] = report.modal.witness_rank;
  }
  json violations = json::array();
  for (const auto& v : report.multiplicity_violations) {
    violations.push_back({{"mu", complex_json(v.mu)}, {"P", v.total_geometric}, {"Mm", v.available_inputs}});
  }
  json partitions = json::array();
  for (const auto& p : report.partition_violations) partitions.push_back(to_json(p));
  json reasons = json::array();
  for (const auto& r : report.reasons) {
    json rec = {{"kind", r.kind}, {"message", r.message}};
    if (r.mu) rec["mu"] = complex_json(*r.mu);
    reasons.push_back(std::move(rec));
  }

  json out;
  out["dimensions"] = {{"n", report.n}, {"m", report.m}, {"N", report.N}, {"M", report.M}};
  out["network_spectrum"] = complex_list(report.global.eigenvalues);
  out["subsystem_controllable"] = report.subsystem_controllable;
  out["subsystem_observable"] = report.subsystem_observable;
  out["global_controllable"] = report.global_controllable;
  out["per_block_controllable"] = std::move(per_block);
  out["mode_catalog"] = to_json(report.mode_catalog);
  out["modal_test"] = std::move(modal);
  out["multiplicity_violations"] = std::move(violations);
  out["blocks_disjoint"] = report.blocks_disjoint;
  out["actuation_bound"] = {{"required", report.actuation_bound.required},
                            {"M", report.actuation_bound.actuated},
                            {"applies", report.actuation_bound.applies},
                            {"ok", report.actuation_bound.ok}};
  out["projection_fixed_requirement"] =
      report.projection_fixed_requirement ? json{{"requires_M_equals_N", true}, {"ok", report.projection_fixed_requirement->ok}}
                                          : json(nullptr);
  out["partition_scanned"] = report.partition_scanned;
  out["partition_violations"] = std::move(partitions);
  if (report.oracle) {
    json oracle = to_json(*report.oracle);
    oracle["agrees"] = report.oracle_agrees.value_or(false);
    out["oracle"] = std::move(oracle);
  } else {
    out["oracle"] = nullptr;
  }
  out["verdict"] = report.verdict == Verdict::Controllable ? "controllable" : "uncontrollable";
  out["reasons"] = std::move(reasons);
  out["narrative"] = narrative(report);
  out["warnings"] = report.warnings;
  out["tolerance_marginal"] = report.tolerance_marginal;
  return out;
}

json envelope(const std::string& command, json payload) {
  json out = {{"schema", kReportSchema}, {"command", command}};
  for (auto& [key, value] : payload.items()) out[key] = std::move(value);
  return out;
}

std::vector<std::string> narrative(const ControllabilityReport& report) {
  std::vector<std::string> lines;
  const auto& catalog = report.mode_catalog;
  std::vector<Complex> invariant;
  std::vector<Complex> fixed;
  for (auto idx : catalog.invariant_modes) {
    invariant.push_back(catalog.records[idx].mu);
    if (catalog.records[idx].projection_fixed) fixed.push_back(catalog.records[idx].mu);
  }

  if (invariant.empty()) {
    lines.push_back(std::string("No network-invariant modes: repeated eigenvalues are special-repeat modes and "
                                "cannot block controllability, so it reduces to the global model (G, S), which is ") +
                    (report.global_controllable ? "controllable." : "uncontrollable."));
  } else {
    std::ostringstream msg;
    msg << "Network-invariant mode(s) at " << join_modes(invariant) << ": for any topology at least ceil(N/m)="
        << report.actuation_bound.required << " subsystems must be actuated (M=" << report.M
        << "), and every vertex subset needs its own share of actuation.";
    lines.push_back(msg.str());
    if (!fixed.empty()) {
      lines.push_back("Projection-fixed mode(s) at " + join_modes(fixed) + ": every subsystem must be actuated (N=" +
                      std::to_string(report.N) + ", M=" + std::to_string(report.M) + ").");
    }
    if (report.subsystem_controllable && report.subsystem_observable) {
      lines.push_back("These modes come from the fixed subsystem interface; with a designable output map "
                      "C = H C_hat a protocol can remove them (see design-protocol).");
    }
  }
  if (report.m == 1) {
    lines.push_back("Single-input single-output subsystem: network-invariant modes are exactly its uncontrollable "
                    "and unobservable modes.");
  }
  if (!catalog.dfm_modes.empty()) {
    lines.push_back("Decentralized fixed mode(s) of the subsystem at " + join_modes(catalog.dfm_modes) +
                    " are network-invariant by construction.");
  }
  if (report.reasons.empty()) {
    lines.push_back("Binding condition: none; every eigenvalue passes the modal test.");
  } else {
    lines.push_back("Binding condition: " + report.reasons.front().message + ".");
  }
  return lines;
}

std::string check_line(const ControllabilityReport& report) {
  if (report.verdict == Verdict::Controllable) return "CONTROLLABLE";
  return "UNCONTROLLABLE: " + report.reasons.front().message;
}

std::string render_text(const ModeCatalog& catalog) {
  std::ostringstream out;
  out << "modes (" << catalog.records.size() << " distinct)\n";
  for (const auto& r : catalog.records) {
    out << "  μ=" << format_complex(r.mu) << "  "
        << (r.classification == ModeClass::NetworkInvariant ? "network-invariant" : "special-repeat")
        << "  P(μ)=" << r.total_geometric;
    if (r.classification == ModeClass::NetworkInvariant) {
      out << "  projection-fixed=" << (r.projection_fixed ? "yes" : "no");
    } else {
      out << "  NR(μ)={" << join_modes(r.repeat_set.values) << "}";
    }
    out << "\n";
    for (const auto& b : r.blocks) {
      out << "      λ=" << format_complex(b.lambda);
      if (b.lambda_multiplicity > 1) out << " (x" << b.lambda_multiplicity << ")";
      out << "  β=" << b.beta << "\n";
    }
  }
  if (!catalog.dfm_modes.empty()) out << "  decentralized fixed modes: " << join_modes(catalog.dfm_modes) << "\n";
  return out.str();
}

std::string render_text(const ControllabilityReport& report) {
  std::ostringstream out;
  auto yes = [](bool b) { return b ? "yes" : "no"; };
  out << "network: n=" << report.n << " m=" << report.m << " N=" << report.N << " M=" << report.M << "\n";
  std::vector<Complex> lambdas(report.global.eigenvalues.data(),
                               report.global.eigenvalues.data() + report.global.eigenvalues.size());
  out << "spectrum of G: " << join_modes(lambdas) << "\n";
  out << "subsystem controllable: " << yes(report.subsystem_controllable)
      << "  observable: " << yes(report.subsystem_observable) << "\n";
  out << "global model (G, S) controllable: " << yes(report.global_controllable) << "\n";
  out << render_text(report.mode_catalog);
  out << "modal test: " << (report.modal.controllable ? "pass" : "fail");
  if (report.modal.witness) out << " at μ=" << format_complex(*report.modal.witness);
  out << "\n";
  if (report.actuation_bound.applies) {
    out << "actuation bound: need " << report.actuation_bound.required << ", have " << report.M << "\n";
  }
  if (report.partition_scanned) {
    out << "partition violations: " << report.partition_violations.size() << "\n";
  }
  if (report.oracle) {
    out << "kalman oracle: rank " << report.oracle->rank << " / " << report.oracle->dimension
        << (report.oracle_agrees.value_or(false) ? " (agrees)" : " (DISAGREES)") << "\n";
  }
  out << "verdict: " << (report.verdict == Verdict::Controllable ? "controllable" : "uncontrollable") << "\n";
  for (const auto& r : report.reasons) out << "  - [" << r.kind << "] " << r.message << "\n";
  out << "\n";
  for (const auto& line : narrative(report)) out << line << "\n";
  for (const auto& w : report.warnings) out << "warning: " << w << "\n";
  return out.str();
}

std::string render_text(const ProtocolDesign& design) {
  std::ostringstream out;
  out << "accepted H after " << design.tries << " tr" << (design.tries == 1 ? "y" : "ies") << ":\n";
  Eigen::IOFormat fmt(Eigen::FullPrecision, 0, ", ", "\n", "  [", "]");
  out << design.H.format(fmt) << "\n";
  out << "spectrum of A: ";
  for (Eigen::Index i = 0; i < design.certificate.spectrum_open.size(); ++i) {
    out << (i ? ", " : "") << format_complex(design.certificate.spectrum_open(i));
  }
  out << "\nspectrum of A + B H C_hat: ";
  for (Eigen::Index i = 0; i < design.certificate.spectrum_closed.size(); ++i) {
    out << (i ? ", " : "") << format_complex(design.certificate.spectrum_closed(i));
  }
  out << "\nmin separation: " << design.certificate.min_separation << " (required > "
      << design.certificate.required_separation << ")\n";
  out << "network-invariant modes after design: "
      << (design.certificate.invariant_modes_after.empty() ? "none" : join_modes(design.certificate.invariant_modes_after))
      << "\n";
  return out.str();
}

}  // namespace modalnet
