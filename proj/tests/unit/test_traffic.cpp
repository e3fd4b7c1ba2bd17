#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "gbo/traffic.hpp"

using namespace gbo;

namespace {

std::string data_path(const std::string& name) { return std::string(GBO_DATA_DIR) + "/siouxfalls/" + name; }

const TrafficNetwork& sioux_falls() {
  static const TrafficNetwork tn =
      parse_tntp(data_path("SiouxFalls_net.tntp"), data_path("SiouxFalls_trips.tntp"));
  return tn;
}

Link link(NodeId from, NodeId to, double fft, double capacity = 1.0, double b = 0.15) {
  Link l;
  l.from = from;
  l.to = to;
  l.free_flow_time = fft;
  l.capacity = capacity;
  l.b = b;
  return l;
}

TrafficNetwork parse_text(const std::string& net, const std::string& trips) {
  std::istringstream n(net), t(trips);
  return parse_tntp(n, "net", t, "trips");
}

const std::string kTinyNet =
    "<NUMBER OF NODES> 3\n<NUMBER OF LINKS> 2\n<END OF METADATA>\n"
    "~ init term cap len fft b power speed toll type ;\n"
    "1 2 100 1 1 0.15 4 0 0 1 ;\n"
    "2 3 100 1 2 0.15 4 0 0 1 ;\n";

}  // namespace

TEST(Tntp, SiouxFallsShape) {
  const auto& tn = sioux_falls();
  EXPECT_EQ(tn.node_count, 24u);
  EXPECT_EQ(tn.links.size(), 76u);
  EXPECT_DOUBLE_EQ(tn.total_demand(), 360600.0);
  EXPECT_EQ(to_undirected(tn).edge_count(), 38u);
}

TEST(Tntp, EmptyTripsFileGivesZeroDemand) {
  const auto tn = parse_text(kTinyNet, "");
  EXPECT_EQ(tn.links.size(), 2u);
  EXPECT_EQ(tn.total_demand(), 0.0);
  EXPECT_EQ(tn.links[1].from, 1u);
  EXPECT_EQ(tn.links[1].free_flow_time, 2.0);
}

TEST(Tntp, ParsesTripBlocks) {
  const auto tn = parse_text(kTinyNet,
                             "<TOTAL OD FLOW> 30\n<END OF METADATA>\n"
                             "Origin 1\n 2 : 10.0; 3 : 20.0;\n");
  ASSERT_EQ(tn.demand.size(), 2u);
  EXPECT_EQ(tn.demand[1].destination, 2u);
  EXPECT_EQ(tn.total_demand(), 30.0);
}

TEST(Tntp, ErrorsCarryLocation) {
  const std::string wrong_count =
      "<NUMBER OF NODES> 3\n<NUMBER OF LINKS> 3\n<END OF METADATA>\n1 2 100 1 1 0.15 4 0 0 1 ;\n";
  EXPECT_THROW(parse_text(wrong_count, ""), ParseError);
  try {
    parse_text("<NUMBER OF NODES> 3\n<NUMBER OF LINKS> 1\n<END OF METADATA>\n1 2 100 x 1 0.15 4 0 0 1 ;\n", "");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
  EXPECT_THROW(parse_text(kTinyNet, "<TOTAL OD FLOW> 99\n<END OF METADATA>\nOrigin 1\n 2 : 10.0;\n"), ParseError);
  EXPECT_THROW(parse_text(kTinyNet, "<END OF METADATA>\n 2 : 10.0;\n"), ParseError);
  EXPECT_THROW(parse_tntp("/nonexistent.tntp", "/nonexistent_trips.tntp"), ParseError);
}

TEST(Bpr, TimeAndIntegral) {
  const auto l = link(0, 1, 2.0, 10.0);
  EXPECT_DOUBLE_EQ(bpr_time(l, 0.0), 2.0);
  EXPECT_DOUBLE_EQ(bpr_time(l, 10.0), 2.0 * 1.15);
  // integral of t0 (1 + b (x/c)^4) from 0 to v is t0 (v + b v^5 / (5 c^4))
  EXPECT_NEAR(bpr_integral(l, 20.0), 2.0 * (20.0 + 0.15 * std::pow(20.0, 5) / (5.0 * 1e4)), 1e-9);
}

TEST(FrankWolfe, SinglePathCarriesAllDemand) {
  TrafficNetwork tn;
  tn.node_count = 3;
  tn.links = {link(0, 1, 1.0, 5.0), link(1, 2, 2.0, 5.0)};
  tn.demand = {{0, 2, 10.0}};
  const auto r = frank_wolfe(tn);
  EXPECT_NEAR(r.flows[0], 10.0, 1e-12);
  EXPECT_NEAR(r.flows[1], 10.0, 1e-12);
  EXPECT_NEAR(r.total_travel_time, 10.0 * (bpr_time(tn.links[0], 10.0) + bpr_time(tn.links[1], 10.0)), 1e-9);
}

TEST(FrankWolfe, ParallelLinksEqualizeTravelTimes) {
  TrafficNetwork tn;
  tn.node_count = 2;
  tn.links = {link(0, 1, 1.0, 10.0), link(0, 1, 1.5, 20.0)};
  tn.demand = {{0, 1, 40.0}};
  FrankWolfeOptions opt;
  opt.tolerance = 1e-7;
  opt.max_iter = 5000;
  const auto r = frank_wolfe(tn, opt);
  EXPECT_NEAR(r.flows[0] + r.flows[1], 40.0, 1e-9);
  EXPECT_NEAR(bpr_time(tn.links[0], r.flows[0]), bpr_time(tn.links[1], r.flows[1]), 1e-3);
}

TEST(FrankWolfe, UnusedRouteStaysEmptyWhenAlwaysSlower) {
  TrafficNetwork tn;
  tn.node_count = 2;
  tn.links = {link(0, 1, 1.0, 100.0), link(0, 1, 50.0, 100.0)};
  tn.demand = {{0, 1, 10.0}};
  const auto r = frank_wolfe(tn);
  EXPECT_EQ(r.flows[1], 0.0);
  EXPECT_TRUE(r.converged);
}

TEST(FrankWolfe, SiouxFallsConservesFlowAndDescends) {
  const auto& tn = sioux_falls();
  const auto r = frank_wolfe(tn);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.relative_gap, 1e-4);
  std::vector<double> net(tn.node_count, 0.0);
  for (std::size_t i = 0; i < tn.links.size(); ++i) {
    EXPECT_GE(r.flows[i], 0.0);
    net[tn.links[i].from] -= r.flows[i];
    net[tn.links[i].to] += r.flows[i];
  }
  for (const auto& od : tn.demand) {
    net[od.origin] += od.flow;
    net[od.destination] -= od.flow;
  }
  for (double v : net) EXPECT_NEAR(v, 0.0, 1e-6 * tn.total_demand());
  for (std::size_t i = 1; i < r.beckmann_history.size(); ++i)
    EXPECT_LE(r.beckmann_history[i], r.beckmann_history[i - 1] * (1 + 1e-12));
}

TEST(FrankWolfe, DisconnectedDemandIsInfeasible) {
  TrafficNetwork tn;
  tn.node_count = 3;
  tn.links = {link(0, 1, 1.0)};
  tn.demand = {{0, 2, 1.0}};
  EXPECT_THROW(frank_wolfe(tn), InfeasibleError);
  EXPECT_EQ(utndp_objective(tn), -std::numeric_limits<double>::infinity());
}

TEST(UtndpObjective, NegativeLogOfTotalTravelTime) {
  TrafficNetwork tn;
  tn.node_count = 2;
  tn.links = {link(0, 1, std::exp(10.0), 1.0, 0.0)};
  tn.demand = {{0, 1, 1.0}};
  EXPECT_NEAR(utndp_objective(tn), -10.0, 1e-12);
}

TEST(BisectRoot, FindsRootOrClampsToBounds) {
  EXPECT_NEAR(bisect_root([](double x) { return x - 0.3; }, 0.0, 1.0, 1e-12), 0.3, 1e-11);
  EXPECT_EQ(bisect_root([](double x) { return x + 1.0; }, 0.0, 1.0, 1e-12), 0.0);
  EXPECT_EQ(bisect_root([](double x) { return x - 2.0; }, 0.0, 1.0, 1e-12), 1.0);
}

TEST(FrankWolfe, ClassicAndConjugateDirectionsAgree) {
  TrafficNetwork tn;
  tn.node_count = 4;
  tn.links = {link(0, 1, 1.0, 5.0), link(0, 2, 2.0, 8.0), link(1, 3, 2.0, 6.0), link(2, 3, 1.0, 5.0),
              link(1, 2, 0.5, 4.0)};
  tn.demand = {{0, 3, 20.0}, {1, 3, 5.0}};
  FrankWolfeOptions classic, conjugate;
  classic.conjugate = false;
  classic.tolerance = conjugate.tolerance = 1e-7;
  classic.max_iter = conjugate.max_iter = 20000;
  const auto a = frank_wolfe(tn, classic), b = frank_wolfe(tn, conjugate);
  EXPECT_TRUE(a.converged);
  EXPECT_TRUE(b.converged);
  EXPECT_NEAR(a.total_travel_time, b.total_travel_time, 1e-5 * a.total_travel_time);
}

TEST(Projects, JsonRoundTripAndErrors) {
  const std::vector<Project> p{{1, 0, 1}, {2, 3, 9}};
  const auto back = parse_projects(projects_to_json(p));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].a, 3u);
  EXPECT_EQ(back[1].b, 9u);
  EXPECT_THROW(parse_projects("{}"), ParseError);
  EXPECT_THROW(parse_projects("[{\"id\":1,\"road\":[0,2]}]"), ParseError);
  EXPECT_THROW(parse_projects("not json"), ParseError);
}

TEST(Candidates, TenProjectsEnumerateEveryDecision) {
  const auto& full = sioux_falls();
  const auto projects = select_projects(full, 10, 2024);
  ASSERT_EQ(projects.size(), 10u);
  const auto cands = build_candidates(full, projects);
  ASSERT_EQ(cands.size(), 1024u);
  EXPECT_EQ(cands.back().graph.edge_count(), 38u);
  EXPECT_EQ(cands.back().network.links.size(), 76u);
  EXPECT_EQ(cands.front().network.links.size(), 76u - 20u);
  EXPECT_EQ(cands.front().graph.edge_count(), 28u);
  for (std::size_t i = 0; i < cands.size(); ++i) EXPECT_EQ(cands[i].decision, i);
  // the base network is every candidate's common subnetwork and stays feasible
  EXPECT_TRUE(detail::demand_connected(cands.front().network));
}

TEST(Candidates, SupersetDecisionsNeverDisconnect) {
  const auto& full = sioux_falls();
  // the first six roads, chosen without a feasibility filter
  std::vector<Project> projects;
  for (const auto& l : full.links)
    if (l.from < l.to && projects.size() < 6) projects.push_back({static_cast<int>(projects.size()) + 1, l.from, l.to});
  const auto cands = build_candidates(full, projects);
  std::vector<char> ok(cands.size());
  for (std::size_t i = 0; i < cands.size(); ++i) ok[i] = detail::demand_connected(cands[i].network);
  for (std::size_t u = 0; u < cands.size(); ++u)
    for (std::size_t v = 0; v < cands.size(); ++v)
      if ((u & v) == u && ok[u]) {
        EXPECT_TRUE(ok[v]) << u << " subset of " << v;
      }
}

TEST(Candidates, GuardsAndValidation) {
  const auto& full = sioux_falls();
  EXPECT_THROW(build_candidates(full, std::vector<Project>(21, Project{1, 0, 1})), ParameterError);
  EXPECT_THROW(build_candidates(full, {{1, 0, 1}, {2, 1, 0}}), ParameterError);
  EXPECT_THROW(build_candidates(full, {{1, 0, 23}}), ParameterError);
}

TEST(EvaluationCache, EvaluatesEachCandidateOnce) {
  int calls = 0;
  EvaluationCache cache([&](std::size_t i) {
    ++calls;
    return static_cast<double>(i) * 2.0;
  });
  EXPECT_EQ(cache(3), 6.0);
  EXPECT_EQ(cache(3), 6.0);
  EXPECT_EQ(cache(4), 8.0);
  EXPECT_EQ(calls, 2);
  EXPECT_EQ(cache.size(), 2u);
}
