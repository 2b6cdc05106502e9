#include "modalnet/cli.hpp"

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "modalnet/controllability.hpp"
#include "modalnet/errors.hpp"
#include "modalnet/model.hpp"
#include "modalnet/protocol.hpp"
#include "modalnet/report.hpp"

namespace modalnet {

namespace {

struct Config {
  std::string command;
  std::string model_path;
  std::string output;
  std::string format = "text";
  std::optional<std::uint64_t> seed;
  std::optional<double> tol_eig;
  std::optional<double> tol_rank;
  std::vector<int> subset;
  std::optional<int> max_subset_size;
  bool no_oracle = false;
  int max_tries = 64;
};

void add_common(CLI::App* sub, Config& cfg) {
  sub->add_option("model", cfg.model_path, "Model file (JSON)")->required();
  sub->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"text", "json"}));
  sub->add_option("-o,--output", cfg.output, "Write the report here instead of stdout");
  sub->add_option("--seed", cfg.seed, "Seed for every randomized test");
  sub->add_option("--tol-eig", cfg.tol_eig, "Eigenvalue clustering tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--tol-rank", cfg.tol_rank, "Relative rank cutoff")->check(CLI::PositiveNumber);
}

Network load(const Config& cfg) {
  Network net = load_network(cfg.model_path);
  if (cfg.seed) net.tolerances.rng_seed = *cfg.seed;
  if (cfg.tol_eig) net.tolerances.eig_cluster_tol = *cfg.tol_eig;
  if (cfg.tol_rank) net.tolerances.rank_rel_tol = *cfg.tol_rank;
  net.tolerances.validate();
  return net;
}

// JSON reports carry the effective tolerances and seed for reproducibility.
std::string dump(const std::string& command, nlohmann::json payload, const Network& net) {
  nlohmann::json doc = envelope(command, std::move(payload));
  doc["tolerances"] = to_json(net).at("tolerances");
  return doc.dump(2) + "\n";
}

struct Outcome {
  std::string body;
  int status = 0;
};

Outcome run_analyze(const Config& cfg, const Network& net) {
  const auto report = analyze(net, {!cfg.no_oracle, cfg.max_subset_size});
  if (cfg.format == "json") return {dump("analyze", to_json(report), net)};
  return {render_text(report)};
}

Outcome run_modes(const Config& cfg, const Network& net) {
  const auto catalog = shared_mode_catalog(net, global_spectrum(net));
  if (cfg.format == "json") return {dump("modes", to_json(catalog), net)};
  return {render_text(catalog)};
}

Outcome run_check(const Config& cfg, const Network& net) {
  const auto report = analyze(net, {!cfg.no_oracle, cfg.max_subset_size});
  const int status = report.verdict == Verdict::Controllable ? 0 : 1;
  if (cfg.format == "json") {
    nlohmann::json payload = {{"verdict", report.verdict == Verdict::Controllable ? "controllable" : "uncontrollable"},
                              {"line", check_line(report)}};
    return {dump("check", std::move(payload), net), status};
  }
  return {check_line(report) + "\n", status};
}

Outcome run_partition(const Config& cfg, const Network& net) {
  const auto graph = build_graph(net);
  std::vector<PartitionCheck> checks;
  const bool single = !cfg.subset.empty();
  if (single) {
    checks.push_back(partition_check(net, graph, cfg.subset));
  } else {
    checks = partition_scan(net, graph, cfg.max_subset_size);
  }
  if (cfg.format == "json") {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& c : checks) list.push_back(to_json(c));
    return {dump("partition", {{"mode", single ? "subset" : "scan"}, {"checks", std::move(list)}}, net)};
  }
  std::ostringstream text;
  if (!single) text << "violating subsets: " << checks.size() << "\n";
  for (const auto& c : checks) {
    text << "{";
    for (std::size_t i = 0; i < c.subset.size(); ++i) text << (i ? "," : "") << c.subset[i];
    text << "}  n_hat=" << c.n_hat << " m_hat=" << c.m_hat << " b=" << c.b << " bound=" << c.bound << "  "
         << (c.satisfied ? "ok" : "VIOLATED") << "\n";
  }
  return {text.str()};
}

Outcome run_design(const Config& cfg, const Network& net) {
  const auto& sub = net.subsystem;
  const RMatrix c_hat = net.C_hat.value_or(sub.C);
  try {
    const auto design = design_protocol(sub.A, sub.B, c_hat, net.tolerances, net.tolerances.rng_seed, cfg.max_tries);
    if (cfg.format == "json") return {dump("design-protocol", to_json(design), net)};
    return {render_text(design)};
  } catch (const DesignExhausted& e) {
    if (cfg.format == "json") {
      nlohmann::json payload = to_json(e.best());
      payload["error"] = e.what();
      return {dump("design-protocol", std::move(payload), net), 1};
    }
    return {std::string(e.what()) + "\n" + render_text(e.best()), 1};
  }
}

Outcome run_oracle(const Config& cfg, const Network& net) {
  const auto oracle = kalman_rank(net);
  if (cfg.format == "json") return {dump("oracle", to_json(oracle), net)};
  std::ostringstream text;
  text << "kalman rank " << oracle.rank << " / " << oracle.dimension << "  "
       << (oracle.controllable() ? "controllable" : "uncontrollable") << (oracle.marginal ? " (marginal)" : "") << "\n";
  return {text.str()};
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Controllability analysis for networks of identical MIMO subsystems", "modalnet"};
  app.require_subcommand(1);
  Config cfg;

  auto* analyze_cmd = app.add_subcommand("analyze", "Full controllability report");
  auto* modes_cmd = app.add_subcommand("modes", "Shared-mode catalog only");
  auto* check_cmd = app.add_subcommand("check", "Verdict line; exit 0 controllable, 1 uncontrollable");
  auto* partition_cmd = app.add_subcommand("partition", "Vertex-subset actuation bound");
  auto* design_cmd = app.add_subcommand("design-protocol", "Search for H so that C = H C_hat has no invariant modes");
  auto* oracle_cmd = app.add_subcommand("oracle", "Kalman rank of the assembled system");
  for (auto* sub : {analyze_cmd, modes_cmd, check_cmd, partition_cmd, design_cmd, oracle_cmd}) add_common(sub, cfg);
  for (auto* sub : {analyze_cmd, check_cmd}) {
    sub->add_option("--max-subset-size", cfg.max_subset_size, "Largest subset in the partition scan")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--no-oracle", cfg.no_oracle, "Skip the Kalman-rank cross-check");
  }
  partition_cmd->add_option("--subset", cfg.subset, "Comma-separated vertex indices; omit to scan")->delimiter(',');
  partition_cmd->add_option("--max-subset-size", cfg.max_subset_size, "Largest subset in the scan")
      ->check(CLI::PositiveNumber);
  design_cmd->add_option("--max-tries", cfg.max_tries, "Random draws before giving up")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }
  cfg.command = app.get_subcommands().front()->get_name();

  Outcome outcome;
  try {
    const Network net = load(cfg);
    if (cfg.command == "analyze") outcome = run_analyze(cfg, net);
    else if (cfg.command == "modes") outcome = run_modes(cfg, net);
    else if (cfg.command == "check") outcome = run_check(cfg, net);
    else if (cfg.command == "partition") outcome = run_partition(cfg, net);
    else if (cfg.command == "design-protocol") outcome = run_design(cfg, net);
    else outcome = run_oracle(cfg, net);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  if (cfg.output.empty()) {
    out << outcome.body;
  } else {
    std::ofstream file(cfg.output);
    if (!(file << outcome.body)) {
      err << "error: cannot write " << cfg.output << "\n";
      return 2;
    }
  }
  return outcome.status;
}

}  // namespace modalnet
