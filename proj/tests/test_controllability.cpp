#include <gtest/gtest.h>

#include "modalnet/controllability.hpp"
#include "modalnet/errors.hpp"
#include "test_support.hpp"

using namespace modalnet;
using testkit::Rng;

namespace {

Network fixture(const char* name) { return load_network(testkit::fixture(name)); }

AnalyzeOptions no_oracle() { return {false, std::nullopt}; }

}  // namespace

TEST(Pbh, DetectsUncontrollableMode) {
  CMatrix f(2, 2), b(2, 1);
  f << 1, 0, 0, 2;
  b << 1, 0;
  const auto r = pbh_controllable(f, b, Tolerances{});
  EXPECT_FALSE(r.controllable);
  ASSERT_EQ(r.uncontrollable_modes.size(), 1u);
  EXPECT_NEAR(std::abs(r.uncontrollable_modes[0] - Complex(2.0)), 0.0, 1e-12);
  b << 1, 1;
  EXPECT_TRUE(pbh_controllable(f, b, Tolerances{}).controllable);
}

TEST(Pbh, ObservabilityIsTheDual) {
  CMatrix f(2, 2), c(1, 2);
  f << 0, 1, 0, 0;
  c << 0, 1;
  EXPECT_FALSE(pbh_observable(c, f, Tolerances{}).controllable);
  c << 1, 0;
  EXPECT_TRUE(pbh_observable(c, f, Tolerances{}).controllable);
}

TEST(Pbh, AgreesWithKalmanOnRandomPairs) {
  Rng rng(201);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = testkit::uniform_int(rng, 1, 5), m = testkit::uniform_int(rng, 1, 2);
    SubsystemModel sub = trial % 2 ? testkit::uncontrollable_subsystem(rng, std::max(n, 2), m)
                                   : testkit::random_subsystem(rng, n, m);
    const bool kalman = testkit::naive_kalman_rank(sub.A, sub.B) == sub.A.rows();
    EXPECT_EQ(pbh_controllable(sub.A.cast<Complex>(), sub.B.cast<Complex>(), Tolerances{}).controllable, kalman)
        << "trial " << trial;
  }
}

TEST(ModalTest, WorkedExamples) {
  for (const auto& [name, want] : {std::pair{"example1.json", false}, std::pair{"example1_swapped.json", true},
                                   std::pair{"example3.json", true}, std::pair{"example2_subsystem.json", false}}) {
    const Network net = fixture(name);
    const auto gs = global_spectrum(net);
    const auto r = modal_test(net, gs, shared_mode_catalog(net, gs));
    EXPECT_EQ(r.controllable, want) << name;
    if (!want) {
      ASSERT_TRUE(r.witness.has_value());
      EXPECT_NEAR(std::abs(*r.witness - Complex(1.0)), 0.0, 1e-7);
      EXPECT_LT(r.witness_rank, r.witness_rows);
    }
  }
}

TEST(ModalTest, MatchesAssembledHautusTest) {
  Rng rng(211);
  int uncontrollable = 0;
  for (int trial = 0; trial < 80; ++trial) {
    const int n = testkit::uniform_int(rng, 1, 3), m = testkit::uniform_int(rng, 1, 2);
    const int N = testkit::uniform_int(rng, 1, 4);
    SubsystemModel sub = trial % 3 == 0 ? testkit::invariant_template(rng) : testkit::random_subsystem(rng, n, m);
    Network net = testkit::make_network(sub, testkit::random_network_matrix(rng, N), testkit::random_actuation(rng, N));
    const auto gs = global_spectrum(net);
    const auto catalog = shared_mode_catalog(net, gs);
    const auto r = modal_test(net, gs, catalog);
    if (r.marginal || catalog.cluster_marginal || gs.cluster_marginal) continue;
    const bool want =
        testkit::naive_pbh_controllable(testkit::naive_assembled_state(net), testkit::naive_assembled_input(net));
    EXPECT_EQ(r.controllable, want) << "trial " << trial;
    uncontrollable += want ? 0 : 1;
  }
  EXPECT_GT(uncontrollable, 5);
}

TEST(Bounds, Example1) {
  const Network net = fixture("example1.json");
  const auto gs = global_spectrum(net);
  const auto catalog = shared_mode_catalog(net, gs);

  const auto viol = multiplicity_bound(catalog, net.global.M(), net.subsystem.m());
  ASSERT_EQ(viol.size(), 1u);
  EXPECT_EQ(viol[0].total_geometric, 3);
  EXPECT_EQ(viol[0].available_inputs, 2);
  EXPECT_TRUE(multiplicity_bound(catalog, 2, 2).empty());

  const auto act = invariant_actuation_bound(catalog, 3, 1, 2);
  EXPECT_TRUE(act.applies);
  EXPECT_EQ(act.required, 2);
  EXPECT_FALSE(act.ok);
  EXPECT_TRUE(invariant_actuation_bound(catalog, 3, 2, 2).ok);

  const auto pf = projection_fixed_requirement(catalog, 3, 1);
  ASSERT_TRUE(pf.has_value());
  EXPECT_FALSE(pf->ok);
  EXPECT_TRUE(projection_fixed_requirement(catalog, 3, 3)->ok);

  EXPECT_FALSE(distinct_block_disjointness(catalog, gs));
}

TEST(Bounds, NoInvariantModesMeansNoActuationBound) {
  const Network net = fixture("example1_swapped.json");
  const auto gs = global_spectrum(net);
  const auto catalog = shared_mode_catalog(net, gs);
  EXPECT_FALSE(catalog.has_invariant_modes());
  EXPECT_FALSE(invariant_actuation_bound(catalog, 3, 1, 2).applies);
  EXPECT_FALSE(projection_fixed_requirement(catalog, 3, 1).has_value());
}

TEST(Bounds, Example3IsNotProjectionFixed) {
  const Network net = fixture("example3.json");
  const auto catalog = shared_mode_catalog(net, global_spectrum(net));
  EXPECT_TRUE(catalog.has_invariant_modes());
  EXPECT_FALSE(projection_fixed_requirement(catalog, 3, 2).has_value());
  EXPECT_TRUE(invariant_actuation_bound(catalog, 3, 2, 4).ok);
}

TEST(Partition, Example1FullSet) {
  const Network net = fixture("example1.json");
  const auto graph = build_graph(net);
  const std::vector<int> all = {0, 1, 2};
  const auto check = partition_check(net, graph, all);
  EXPECT_EQ(check.n_hat, 3);
  EXPECT_EQ(check.m_hat, 1);
  EXPECT_EQ(check.b, 0);
  EXPECT_EQ(check.bound, 2);
  EXPECT_FALSE(check.satisfied);
  EXPECT_EQ(check.deficit(), 1);
}

TEST(Partition, BoundaryVerticesReduceTheBound) {
  const Network net = fixture("example1.json");
  const auto graph = build_graph(net);
  // {1, 2}: vertex 1 hears vertex 0 from outside, so b = 1 and the bound is 0
  const std::vector<int> tail = {2, 1};
  const auto check = partition_check(net, graph, tail);
  EXPECT_EQ(check.subset, (std::vector<int>{1, 2}));
  EXPECT_EQ(check.b, 1);
  EXPECT_EQ(check.bound, 0);
  EXPECT_TRUE(check.satisfied);
}

TEST(Partition, RejectsBadSubsets) {
  const Network net = fixture("example1.json");
  const auto graph = build_graph(net);
  EXPECT_THROW(partition_check(net, graph, std::vector<int>{}), EmptySubset);
  EXPECT_THROW(partition_check(net, graph, std::vector<int>{3}), IndexError);
  EXPECT_THROW(partition_check(net, graph, std::vector<int>{1, 1}), IndexError);
}

TEST(Partition, ScanResults) {
  const Network ex3 = fixture("example3.json");
  EXPECT_TRUE(partition_scan(ex3, build_graph(ex3)).empty());

  const Network ex1 = fixture("example1.json");
  const auto found = partition_scan(ex1, build_graph(ex1));
  ASSERT_FALSE(found.empty());
  EXPECT_EQ(found.front().subset, (std::vector<int>{0, 1, 2}));
  for (std::size_t i = 1; i < found.size(); ++i) EXPECT_GE(found[i - 1].deficit(), found[i].deficit());
}

TEST(Partition, ScanMatchesExhaustiveChecks) {
  Rng rng(221);
  for (int trial = 0; trial < 20; ++trial) {
    const int N = testkit::uniform_int(rng, 2, 6);
    const Network net = testkit::make_network(testkit::random_subsystem(rng, 2, testkit::uniform_int(rng, 1, 2)),
                                              testkit::random_laplacian(rng, N, 0.4), testkit::random_actuation(rng, N));
    const auto graph = build_graph(net);
    const auto found = partition_scan(net, graph);
    std::size_t violations = 0;
    for (int mask = 1; mask < (1 << N); ++mask) {
      std::vector<int> subset;
      for (int v = 0; v < N; ++v) {
        if (mask & (1 << v)) subset.push_back(v);
      }
      violations += partition_check(net, graph, subset).satisfied ? 0 : 1;
    }
    EXPECT_EQ(found.size(), violations);
  }
}

TEST(Partition, BudgetIsEnforced) {
  Rng rng(222);
  const Network net = testkit::make_network(testkit::random_subsystem(rng, 1, 1), testkit::random_laplacian(rng, 24), {0});
  const auto graph = build_graph(net);
  EXPECT_THROW(partition_scan(net, graph), BudgetExceeded);
  EXPECT_NO_THROW(partition_scan(net, graph, 3));
}

TEST(Oracle, WorkedExamples) {
  EXPECT_LT(kalman_rank(fixture("example1.json")).rank, 9);
  EXPECT_EQ(kalman_rank(fixture("example1_swapped.json")).rank, 9);
  EXPECT_EQ(kalman_rank(fixture("example3.json")).rank, 9);
  EXPECT_EQ(kalman_rank(fixture("example1.json")).dimension, 9);
}

TEST(Oracle, MatchesHautusAndKalmanMatrixOnSmallSystems) {
  Rng rng(231);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = testkit::uniform_int(rng, 1, 3), m = testkit::uniform_int(rng, 1, 2);
    const int N = testkit::uniform_int(rng, 1, 3);
    SubsystemModel sub = trial % 3 == 0 ? testkit::invariant_template(rng) : testkit::random_subsystem(rng, n, m);
    const Network net =
        testkit::make_network(sub, testkit::random_network_matrix(rng, N), testkit::random_actuation(rng, N));
    const auto oracle = kalman_rank(net);
    if (oracle.marginal) continue;
    const RMatrix a = testkit::naive_assembled_state(net), b = testkit::naive_assembled_input(net);
    EXPECT_EQ(oracle.controllable(), testkit::naive_pbh_controllable(a, b)) << "trial " << trial;
    // the power matrix loses rank to roundoff on stiff cases; compare only when its SVD is clear-cut
    if (testkit::naive_kalman_rank(a, b, 1e-6) == testkit::naive_kalman_rank(a, b, 1e-12)) {
      EXPECT_EQ(oracle.rank, testkit::naive_kalman_rank(a, b)) << "trial " << trial;
    }
  }
}

TEST(Oracle, ReachableAndUnreachableCopiesOfOneEigenvalue) {
  // G carries a double eigenvalue 3 with one actuator, so each mode of A + 3BC
  // keeps one unreachable copy; the Krylov recursion alone reports full rank here
  const Network net = fixture("shared_eigenvalue.json");
  const auto oracle = kalman_rank(net);
  EXPECT_EQ(oracle.rank, 20);
  EXPECT_FALSE(oracle.marginal);
  const auto report = analyze(net);
  EXPECT_EQ(report.verdict, Verdict::Uncontrollable);
  EXPECT_TRUE(report.oracle_agrees.value_or(false));
}

TEST(Oracle, ScaleLimit) {
  Rng rng(232);
  const Network net = testkit::make_network(testkit::random_subsystem(rng, 5, 1), testkit::random_laplacian(rng, 81), {0});
  EXPECT_THROW(kalman_rank(net), ScaleLimit);
}

TEST(Analyze, WorkedExampleVerdicts) {
  const auto ex1 = analyze(fixture("example1.json"));
  EXPECT_EQ(ex1.verdict, Verdict::Uncontrollable);
  ASSERT_FALSE(ex1.reasons.empty());
  EXPECT_EQ(ex1.reasons.front().kind, "multiplicity_bound");
  EXPECT_EQ(ex1.reasons.front().message, "network-invariant mode μ=1 has P(μ)=3 > M·m=2");
  EXPECT_TRUE(ex1.oracle_agrees.value_or(false));
  EXPECT_TRUE(ex1.partition_scanned);

  const auto swapped = analyze(fixture("example1_swapped.json"));
  EXPECT_EQ(swapped.verdict, Verdict::Controllable);
  EXPECT_TRUE(swapped.reasons.empty());
  ASSERT_TRUE(swapped.oracle.has_value());
  EXPECT_EQ(swapped.oracle->rank, 9);

  const auto ex3 = analyze(fixture("example3.json"));
  EXPECT_EQ(ex3.verdict, Verdict::Controllable);
  EXPECT_TRUE(ex3.partition_violations.empty());
}

TEST(Analyze, ReasonPrecedenceStartsWithSubsystem) {
  Rng rng(241);
  const Network net = testkit::make_network(testkit::uncontrollable_subsystem(rng, 3, 1),
                                            testkit::random_laplacian(rng, 3), {0, 1, 2});
  const auto report = analyze(net, no_oracle());
  EXPECT_EQ(report.verdict, Verdict::Uncontrollable);
  EXPECT_EQ(report.reasons.front().kind, "subsystem_uncontrollable");
  EXPECT_FALSE(report.oracle.has_value());
}

TEST(Analyze, GlobalUncontrollable) {
  // complete graph: repeated Laplacian eigenvalue, one leader cannot control it
  RMatrix g = -RMatrix::Ones(4, 4);
  g.diagonal().setConstant(3.0);
  const Network net = testkit::make_network(fixture("example1_swapped.json").subsystem, g, {0});
  const auto report = analyze(net);
  EXPECT_FALSE(report.global_controllable);
  EXPECT_EQ(report.verdict, Verdict::Uncontrollable);
  EXPECT_EQ(report.reasons.front().kind, "global_uncontrollable");
  EXPECT_TRUE(report.oracle_agrees.value_or(false));
}

TEST(Analyze, DefectiveNetworkMatrix) {
  EXPECT_THROW(analyze(fixture("defective_g.json")), DefectiveNetworkMatrix);
}

TEST(Analyze, VerdictAgreesWithOracle) {
  Rng rng(251);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int N = testkit::uniform_int(rng, 1, 4);
    SubsystemModel sub = trial % 2 ? testkit::invariant_template(rng)
                                   : testkit::random_subsystem(rng, testkit::uniform_int(rng, 1, 3), 2);
    const Network net =
        testkit::make_network(sub, testkit::random_network_matrix(rng, N), testkit::random_actuation(rng, N));
    const auto report = analyze(net);
    ASSERT_TRUE(report.oracle.has_value());
    if (report.tolerance_marginal || report.oracle->marginal) continue;
    ++checked;
    EXPECT_EQ(report.verdict == Verdict::Controllable, report.oracle->controllable()) << "trial " << trial;
  }
  EXPECT_GT(checked, 45);
}
