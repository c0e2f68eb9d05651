#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "citymesh/error.hpp"
#include "citymesh/net/group.hpp"
#include "citymesh/net/throughput.hpp"
#include "citymesh/rng.hpp"

using namespace citymesh;
using namespace citymesh::net;

namespace {

/// Registry with one group of each supported size:
///   group 1: owner 10, client 11            (size 2)
///   group 2: owner 30, clients 31, 32       (size 3)
///   group 3: owner 20, clients 21, 22, 23   (size 4)
[[nodiscard]] GroupRegistry demo_topology() {
  GroupRegistry reg;
  reg.form_group(10, {11});
  reg.form_group(30, {31, 32});
  reg.form_group(20, {21, 22, 23});
  return reg;
}

[[nodiscard]] Flow flow(PeerId src, PeerId dst, FlowKind kind, double weight = 1.0) {
  return Flow{src, dst, kind, weight};
}

constexpr std::vector<MultiGroupLink>* kNoLinks = nullptr;

[[nodiscard]] ThroughputResult run_pattern(const GroupRegistry& reg,
                                           const std::vector<Flow>& flows,
                                           const ThroughputModelParams& params = {},
                                           const std::vector<MultiGroupLink>& links = {}) {
  (void)kNoLinks;
  return flow_throughputs(reg, links, FlowPattern{flows}, params);
}

}  // namespace

// ============================================================================
// Owner election
// ============================================================================

TEST_CASE("owner election takes the highest intent, smallest id on ties") {
  CHECK(elect_group_owner({{5, 7}, {9, 7}, {3, 2}}) == 5);
  CHECK(elect_group_owner({{4, 0}, {7, 15}}) == 7);
  CHECK(elect_group_owner({{42, 0}}) == 42);
  CHECK(elect_group_owner({{9, 3}, {2, 3}, {6, 3}}) == 2);
}

TEST_CASE("owner election rejects bad candidate sets") {
  CHECK_THROWS_AS((void)elect_group_owner({}), ValidationError);
  CHECK_THROWS_AS((void)elect_group_owner({{1, -1}}), ValidationError);
  CHECK_THROWS_AS((void)elect_group_owner({{1, 16}}), ValidationError);
  CHECK_THROWS_AS((void)elect_group_owner({{1, 4}, {1, 5}}), ValidationError);
}

// ============================================================================
// Group registry
// ============================================================================

TEST_CASE("group formation enforces the star structure") {
  GroupRegistry reg;
  const GroupId g1 = reg.form_group(1, {3, 2});
  CHECK(g1 == 1);
  const Group* group = reg.find(g1);
  REQUIRE(group != nullptr);
  CHECK(group->owner == 1);
  CHECK(group->clients == std::vector<PeerId>{2, 3});  // sorted on entry

  CHECK(reg.is_grouped(1));
  CHECK(reg.is_grouped(3));
  CHECK(reg.is_owner(1));
  CHECK_FALSE(reg.is_owner(2));
  CHECK_FALSE(reg.is_grouped(9));
  CHECK(reg.group_of(2) == group);
  CHECK(reg.group_of(9) == nullptr);

  const GroupId g2 = reg.form_group(4, {5});
  CHECK(g2 == 2);
  CHECK(reg.group_count() == 2);

  SUBCASE("invalid member sets are rejected") {
    CHECK_THROWS_AS(reg.form_group(6, {}), ValidationError);
    CHECK_THROWS_AS(reg.form_group(6, {6}), ValidationError);
    CHECK_THROWS_AS(reg.form_group(6, {7, 7}), ValidationError);
    CHECK_THROWS_AS(reg.form_group(6, {7, 8, 9, 10}), CapacityError);  // 5 > max 4
  }
  SUBCASE("peers already in a group cannot join another") {
    CHECK_THROWS_AS(reg.form_group(1, {6}), MembershipError);   // grouped owner
    CHECK_THROWS_AS(reg.form_group(6, {2}), MembershipError);   // grouped client
  }
  SUBCASE("max_size must admit an owner and a client") {
    CHECK_THROWS_AS(GroupRegistry{GroupConfig{1}}, ValidationError);
    const GroupRegistry pairs_only{GroupConfig{2}};
    CHECK(pairs_only.config().max_size == 2);
  }
}

TEST_CASE("admission and removal keep groups consistent") {
  GroupRegistry reg;
  const GroupId g = reg.form_group(1, {2});
  reg.admit_client(g, 3);
  reg.admit_client(g, 4);
  CHECK(reg.find(g)->clients == std::vector<PeerId>{2, 3, 4});
  CHECK_THROWS_AS(reg.admit_client(g, 5), CapacityError);
  CHECK_THROWS_AS(reg.admit_client(g, 2), MembershipError);
  CHECK_THROWS_AS(reg.admit_client(99, 5), NotFoundError);

  SUBCASE("removing a client keeps the group alive") {
    const RemovalResult res = reg.remove_peer(3);
    CHECK(res.group == g);
    CHECK_FALSE(res.dissolved);
    CHECK(res.released.empty());
    CHECK(reg.find(g)->clients == std::vector<PeerId>{2, 4});
    CHECK_FALSE(reg.is_grouped(3));
  }
  SUBCASE("removing the owner dissolves the group and releases the clients") {
    const RemovalResult res = reg.remove_peer(1);
    CHECK(res.group == g);
    CHECK(res.dissolved);
    CHECK(res.released == std::vector<PeerId>{2, 3, 4});
    CHECK(reg.group_count() == 0);
    CHECK_FALSE(reg.is_grouped(2));
  }
  SUBCASE("removing the last client dissolves rather than leaving a lone owner") {
    reg.remove_peer(3);
    reg.remove_peer(4);
    const RemovalResult res = reg.remove_peer(2);
    CHECK(res.dissolved);
    CHECK(res.released == std::vector<PeerId>{1});
    CHECK(reg.group_count() == 0);
  }
  SUBCASE("removing an ungrouped peer is an error") {
    CHECK_THROWS_AS(reg.remove_peer(42), MembershipError);
  }
  SUBCASE("dissolve releases the owner first") {
    CHECK(reg.dissolve(g) == std::vector<PeerId>{1, 2, 3, 4});
    CHECK_THROWS_AS((void)reg.dissolve(g), NotFoundError);
  }
}

TEST_CASE("hop counts follow the star topology") {
  const GroupRegistry reg = demo_topology();
  CHECK(reg.hop_count(20, 21) == 1);
  CHECK(reg.hop_count(21, 20) == 1);
  CHECK(reg.hop_count(21, 22) == 2);
  CHECK_THROWS_AS((void)reg.hop_count(21, 21), ValidationError);
  CHECK_THROWS_AS((void)reg.hop_count(21, 31), MembershipError);  // different groups
  CHECK_THROWS_AS((void)reg.hop_count(20, 99), MembershipError);  // ungrouped
}

TEST_CASE("random operation sequences never break the registry invariants") {
  Rng rng{0x5eedbeefu};
  GroupRegistry reg;
  int successes = 0;
  for (int step = 0; step < 1500; ++step) {
    const auto peer = [&] { return static_cast<PeerId>(rng.next_below(24)); };
    try {
      switch (rng.next_below(5)) {
        case 0: {
          std::vector<PeerId> clients;
          const std::size_t n = 1 + rng.next_below(3);
          for (std::size_t i = 0; i < n; ++i) clients.push_back(peer());
          reg.form_group(peer(), clients);
          break;
        }
        case 1:
          reg.admit_client(static_cast<GroupId>(1 + rng.next_below(12)), peer());
          break;
        case 2:
          reg.remove_peer(peer());
          break;
        case 3:
          reg.dissolve(static_cast<GroupId>(1 + rng.next_below(12)));
          break;
        default:
          (void)reg.hop_count(peer(), peer());
          break;
      }
      ++successes;
    } catch (const ValidationError&) {
    } catch (const MembershipError&) {
    } catch (const CapacityError&) {
    } catch (const NotFoundError&) {
    }
    reg.check_invariants();  // IntegrityError here fails the test
  }
  CHECK(successes > 100);
  const std::vector<Group> snapshot = reg.groups();
  CHECK(std::is_sorted(snapshot.begin(), snapshot.end(),
                       [](const Group& a, const Group& b) { return a.id < b.id; }));
}

// ============================================================================
// Bridges
// ============================================================================

TEST_CASE("bridges require manual declaration and a valid topology") {
  const GroupRegistry reg = demo_topology();
  const std::vector<BridgeDeclaration> declared{{31, 10}, {32, 10}};

  const MultiGroupLink link = create_bridge(reg, {31, 10}, declared);
  CHECK(link.bridge == 31);
  CHECK(link.remote_owner == 10);
  CHECK(link.manually_configured);

  // Two bridges between the same pair of groups are allowed.
  const MultiGroupLink second = create_bridge(reg, {32, 10}, declared);
  CHECK(second.bridge == 32);

  CHECK_THROWS_AS((void)create_bridge(reg, {21, 10}, declared), PolicyError);  // undeclared
  CHECK_THROWS_AS((void)create_bridge(reg, {30, 10}, {{30, 10}}), ValidationError);  // owner
  CHECK_THROWS_AS((void)create_bridge(reg, {99, 10}, {{99, 10}}), ValidationError);  // ungrouped
  CHECK_THROWS_AS((void)create_bridge(reg, {31, 11}, {{31, 11}}), ValidationError);  // not an owner
  CHECK_THROWS_AS((void)create_bridge(reg, {31, 30}, {{31, 30}}), ValidationError);  // same group
}

// ============================================================================
// Pattern signatures
// ============================================================================

TEST_CASE("pattern signatures are canonical and mark shared sinks") {
  auto sig = make_pattern_signature({flow(20, 21, FlowKind::g2c)});
  CHECK(sig.text == "g2c");
  CHECK(sig.canonical == std::vector<std::size_t>{0});

  sig = make_pattern_signature({flow(22, 23, FlowKind::c2c)});
  CHECK(sig.text == "c2c");

  // Canonical order is owner flows first, regardless of listing order.
  sig = make_pattern_signature({flow(22, 23, FlowKind::c2c), flow(20, 21, FlowKind::g2c)});
  CHECK(sig.text == "g2c+c2c");
  CHECK(sig.canonical == std::vector<std::size_t>{1, 0});

  // Two relayed flows into the same sink are both marked.
  sig = make_pattern_signature({flow(22, 21, FlowKind::c2c), flow(23, 21, FlowKind::c2c)});
  CHECK(sig.text == "c2c!+c2c!");
  CHECK(sig.canonical == std::vector<std::size_t>{0, 1});

  sig = make_pattern_signature({flow(22, 21, FlowKind::c2c), flow(20, 21, FlowKind::g2c),
                                flow(23, 21, FlowKind::c2c)});
  CHECK(sig.text == "g2c!+c2c!+c2c!");
  CHECK(sig.canonical == std::vector<std::size_t>{1, 0, 2});

  // Unmarked flows sort before marked ones within a kind.
  sig = make_pattern_signature({flow(21, 22, FlowKind::c2c), flow(23, 22, FlowKind::c2c),
                                flow(21, 23, FlowKind::c2c)});
  CHECK(sig.text == "c2c+c2c!+c2c!");
  CHECK(sig.canonical == std::vector<std::size_t>{2, 0, 1});

  CHECK_THROWS_AS((void)make_pattern_signature({flow(31, 10, FlowKind::bridge)}),
                  ValidationError);
}

// ============================================================================
// Empirical throughput lookup
// ============================================================================

TEST_CASE("empirical mode reproduces every measured cell exactly") {
  const GroupRegistry reg = demo_topology();

  struct Case {
    std::vector<Flow> flows;
    std::vector<double> expected;
  };
  const std::vector<Case> cases{
      {{flow(10, 11, FlowKind::g2c)}, {54.4}},
      {{flow(30, 31, FlowKind::g2c)}, {52.6}},
      {{flow(31, 32, FlowKind::c2c)}, {22.3}},
      {{flow(30, 31, FlowKind::g2c), flow(31, 32, FlowKind::c2c)}, {44.3, 4.24}},
      {{flow(20, 21, FlowKind::g2c)}, {52.75}},
      {{flow(21, 20, FlowKind::g2c)}, {52.75}},  // direction-agnostic
      {{flow(22, 23, FlowKind::c2c)}, {17.0}},
      {{flow(20, 21, FlowKind::g2c), flow(22, 23, FlowKind::c2c)}, {40.0, 5.41}},
      {{flow(22, 21, FlowKind::c2c), flow(23, 21, FlowKind::c2c)}, {12.7, 9.07}},
      {{flow(20, 21, FlowKind::g2c), flow(22, 21, FlowKind::c2c),
        flow(23, 21, FlowKind::c2c)},
       {37.4, 2.9, 3.22}},
  };
  for (const Case& c : cases) {
    CAPTURE(c.expected[0]);
    const ThroughputResult res = run_pattern(reg, c.flows);
    CHECK_FALSE(res.extrapolated);
    CHECK(res.per_flow_mbps == c.expected);
  }
}

TEST_CASE("empirical rates map back through the input flow order") {
  const GroupRegistry reg = demo_topology();

  // Relayed flow listed first still receives the relayed-flow rate.
  ThroughputResult res = run_pattern(
      reg, {flow(31, 32, FlowKind::c2c), flow(30, 31, FlowKind::g2c)});
  CHECK(res.per_flow_mbps == std::vector<double>{4.24, 44.3});

  // Among equal tokens, listing order assigns the measured rates.
  res = run_pattern(reg, {flow(23, 21, FlowKind::c2c), flow(22, 21, FlowKind::c2c)});
  CHECK(res.per_flow_mbps == std::vector<double>{12.7, 9.07});

  res = run_pattern(reg, {flow(22, 21, FlowKind::c2c), flow(23, 21, FlowKind::c2c),
                          flow(20, 21, FlowKind::g2c)});
  CHECK(res.per_flow_mbps == std::vector<double>{2.9, 3.22, 37.4});
}

TEST_CASE("patterns missing from the table fall back to the analytic model") {
  const GroupRegistry reg = demo_topology();

  // Two relayed flows with distinct sinks have no measured row for size 4.
  const std::vector<Flow> unmeasured{flow(21, 22, FlowKind::c2c),
                                     flow(22, 23, FlowKind::c2c)};
  ThroughputResult res = run_pattern(reg, unmeasured);
  CHECK(res.extrapolated);
  CHECK(res.per_flow_mbps[0] == doctest::Approx(0.5 * 54.4 / 2.0).epsilon(1e-12));
  CHECK(res.per_flow_mbps[1] == doctest::Approx(0.5 * 54.4 / 2.0).epsilon(1e-12));

  // A measured group keeps its exact rates even when another group falls back.
  std::vector<Flow> mixed{flow(10, 11, FlowKind::g2c)};
  mixed.insert(mixed.end(), unmeasured.begin(), unmeasured.end());
  res = run_pattern(reg, mixed);
  CHECK(res.extrapolated);
  CHECK(res.per_flow_mbps[0] == 54.4);

  // The per-size capacity steers the fallback when configured.
  ThroughputModelParams params;
  params.c_med_by_size[4] = 40.0;
  res = run_pattern(reg, unmeasured, params);
  CHECK(res.per_flow_mbps[0] == doctest::Approx(0.5 * 40.0 / 2.0).epsilon(1e-12));

  // An empirical row with the wrong arity is a configuration error.
  ThroughputModelParams corrupt;
  corrupt.empirical_table[{2, "g2c"}] = {54.4, 1.0};
  CHECK_THROWS_AS((void)run_pattern(reg, {flow(10, 11, FlowKind::g2c)}, corrupt),
                  ValidationError);
}

// ============================================================================
// Bridge flows
// ============================================================================

TEST_CASE("bridge flows are priced at the fixed bridge rate") {
  const GroupRegistry reg = demo_topology();
  const std::vector<BridgeDeclaration> declared{{31, 10}};
  const std::vector<MultiGroupLink> links{create_bridge(reg, {31, 10}, declared)};

  ThroughputResult res = run_pattern(
      reg, {flow(30, 31, FlowKind::g2c), flow(31, 10, FlowKind::bridge)}, {}, links);
  CHECK(res.per_flow_mbps == std::vector<double>{52.6, 6.8});
  CHECK_FALSE(res.extrapolated);

  // Either orientation of the link endpoints matches.
  res = run_pattern(reg, {flow(10, 31, FlowKind::bridge)}, {}, links);
  CHECK(res.per_flow_mbps == std::vector<double>{6.8});

  ThroughputModelParams fast;
  fast.bridge_rate_mbps = 10.0;
  res = run_pattern(reg, {flow(31, 10, FlowKind::bridge)}, fast, links);
  CHECK(res.per_flow_mbps == std::vector<double>{10.0});

  CHECK_THROWS_AS((void)run_pattern(reg, {flow(32, 10, FlowKind::bridge)}, {}, links),
                  ValidationError);
  CHECK_THROWS_AS((void)run_pattern(reg, {flow(31, 10, FlowKind::bridge)}),
                  ValidationError);  // no active links at all
}

// ============================================================================
// Analytic model
// ============================================================================

TEST_CASE("analytic shares conserve airtime and respect hop counts") {
  CHECK(analytic_throughputs({{1, 1.0}}, 54.4) == std::vector<double>{54.4});
  CHECK(analytic_throughputs({{2, 1.0}}, 54.4) == std::vector<double>{27.2});

  SUBCASE("a lone relayed flow gets exactly half the direct rate") {
    for (const double c : {54.4, 52.6, 52.75, 17.3}) {
      const double direct = analytic_throughputs({{1, 1.0}}, c)[0];
      const double relayed = analytic_throughputs({{2, 1.0}}, c)[0];
      CHECK(relayed == 0.5 * direct);  // exact, not approximate
    }
  }

  SUBCASE("airtime conservation holds for random patterns") {
    Rng rng{20260815u};
    for (int trial = 0; trial < 300; ++trial) {
      const std::size_t n = 1 + rng.next_below(4);
      std::vector<std::pair<int, double>> hw;
      for (std::size_t i = 0; i < n; ++i)
        hw.emplace_back(1 + static_cast<int>(rng.next_below(2)),
                        0.05 + 10.0 * rng.next_double());
      const double c = 1.0 + 99.0 * rng.next_double();
      const std::vector<double> rates = analytic_throughputs(hw, c);
      double airtime = 0.0;
      for (std::size_t i = 0; i < n; ++i) airtime += hw[i].first * rates[i];
      CHECK(std::abs(airtime - c) <= 1e-9 * c);
    }
  }

  SUBCASE("adding flows can only slow the existing ones") {
    std::vector<std::pair<int, double>> hw{{1, 1.0}};
    std::vector<double> prev = analytic_throughputs(hw, 54.4);
    for (int extra = 0; extra < 4; ++extra) {
      hw.emplace_back(2, 1.0);
      const std::vector<double> next = analytic_throughputs(hw, 54.4);
      for (std::size_t i = 0; i < prev.size(); ++i) CHECK(next[i] < prev[i]);
      prev = next;
    }
  }

  SUBCASE("invalid inputs are rejected") {
    CHECK_THROWS_AS((void)analytic_throughputs({{0, 1.0}}, 54.4), ValidationError);
    CHECK_THROWS_AS((void)analytic_throughputs({{1, 0.0}}, 54.4), ValidationError);
    CHECK_THROWS_AS((void)analytic_throughputs({{1, -2.0}}, 54.4), ValidationError);
    CHECK_THROWS_AS((void)analytic_throughputs({{1, 1.0}}, 0.0), ValidationError);
  }
}

TEST_CASE("analytic mode uses fitted weights when available") {
  const GroupRegistry reg = demo_topology();
  ThroughputModelParams params;
  params.mode = ThroughputMode::analytic;
  params.c_med_by_size[3] = 52.78;
  params.fitted_weights[{3, "g2c+c2c"}] = {0.839, 0.161};

  const ThroughputResult res = run_pattern(
      reg, {flow(30, 31, FlowKind::g2c), flow(31, 32, FlowKind::c2c)}, params);
  CHECK(res.per_flow_mbps[0] == doctest::Approx(0.839 * 52.78).epsilon(1e-12));
  CHECK(res.per_flow_mbps[1] == doctest::Approx(0.161 * 52.78 / 2.0).epsilon(1e-12));
  // ...which lands within rounding distance of the measured pair.
  CHECK(res.per_flow_mbps[0] == doctest::Approx(44.3).epsilon(0.002));
  CHECK(res.per_flow_mbps[1] == doctest::Approx(4.25).epsilon(0.002));
  CHECK_FALSE(res.extrapolated);

  SUBCASE("flow weights steer the split when no fitted entry matches") {
    const ThroughputResult weighted = run_pattern(
        reg,
        {flow(20, 21, FlowKind::g2c, 3.0), flow(20, 22, FlowKind::g2c, 1.0)}, params);
    CHECK(weighted.per_flow_mbps[0] == doctest::Approx(0.75 * 54.4).epsilon(1e-12));
    CHECK(weighted.per_flow_mbps[1] == doctest::Approx(0.25 * 54.4).epsilon(1e-12));
  }
  SUBCASE("fitted weights with the wrong arity are rejected") {
    ThroughputModelParams corrupt = params;
    corrupt.fitted_weights[{3, "g2c"}] = {0.5, 0.5};
    CHECK_THROWS_AS((void)run_pattern(reg, {flow(30, 31, FlowKind::g2c)}, corrupt),
                    ValidationError);
  }
}

// ============================================================================
// Pattern validation
// ============================================================================

TEST_CASE("invalid flow patterns are rejected") {
  const GroupRegistry reg = demo_topology();
  const auto reject = [&](const std::vector<Flow>& flows) {
    CHECK_THROWS_AS((void)run_pattern(reg, flows), ValidationError);
  };
  reject({flow(21, 21, FlowKind::c2c)});             // src == dst
  reject({flow(20, 21, FlowKind::g2c, 0.0)});        // non-positive weight
  reject({flow(20, 21, FlowKind::g2c, -1.0)});
  reject({flow(21, 22, FlowKind::g2c)});             // no owner endpoint
  reject({flow(20, 21, FlowKind::c2c)});             // owner in a client flow
  reject({flow(21, 31, FlowKind::c2c)});             // spans two groups
  reject({flow(20, 99, FlowKind::g2c)});             // ungrouped endpoint

  const ThroughputResult empty = run_pattern(reg, {});
  CHECK(empty.per_flow_mbps.empty());
  CHECK_FALSE(empty.extrapolated);
}

// ============================================================================
// Table parsing and shipped data
// ============================================================================

TEST_CASE("the empirical table text format round-trips the builtin data") {
  const std::string text =
      "# comment\n"
      "2 g2c 54.4\n"
      "\n"
      "3 g2c 52.6\n"
      "3 c2c 22.3\n"
      "3 g2c+c2c 44.3 4.24\n"
      "4 g2c 52.75\n"
      "4 c2c 17\n"
      "4 g2c+c2c 40 5.41   # trailing comment\n"
      "4 c2c!+c2c! 12.7 9.07\n"
      "4 g2c!+c2c!+c2c! 37.4 2.9 3.22\n";
  CHECK(parse_empirical_table(text) == builtin_empirical_table());
}

TEST_CASE("the shipped measurement file matches the builtin table") {
  CHECK(load_empirical_table(CITYMESH_SOURCE_DIR "/calibration/throughput_empirical.txt") ==
        builtin_empirical_table());
  CHECK_THROWS_AS((void)load_empirical_table("/nonexistent/table.txt"), IoError);
}

TEST_CASE("malformed empirical tables are rejected with line numbers") {
  const auto reject = [](const std::string& text) {
    CHECK_THROWS_AS((void)parse_empirical_table(text), ValidationError);
  };
  reject("1 g2c 54.4\n");              // group size below 2
  reject("x g2c 54.4\n");              // unparsable size
  reject("2\n");                       // missing signature
  reject("2 x2x 5\n");                 // unknown token
  reject("2 g2c 1 2\n");               // rate count mismatch
  reject("2 g2c\n");                   // no rates
  reject("2 g2c 0\n");                 // non-positive rate
  reject("2 g2c -4\n");
  reject("2 g2c 54.4\n2 g2c 54.4\n");  // duplicate row
  reject("2 c2c 5\n");                 // relayed flow needs 3+ members
  reject("3 c2c+g2c 1 2\n");           // not canonical order

  CHECK(parse_empirical_table("").empty());
  CHECK(parse_empirical_table("# only comments\n\n").empty());

  try {
    (void)parse_empirical_table("2 g2c 54.4\nbroken\n");
    FAIL("expected ValidationError");
  } catch (const ValidationError& err) {
    CHECK(std::string{err.what()}.find("line 2") != std::string::npos);
  }
}

TEST_CASE("mode and capacity helpers") {
  CHECK(throughput_mode_from_string("empirical") == ThroughputMode::empirical);
  CHECK(throughput_mode_from_string("analytic") == ThroughputMode::analytic);
  CHECK_FALSE(throughput_mode_from_string("guess").has_value());
  CHECK(std::string{to_string(ThroughputMode::analytic)} == "analytic");
  CHECK(std::string{to_string(FlowKind::c2c)} == "c2c");

  ThroughputModelParams params;
  CHECK(medium_capacity(params, 3) == 54.4);
  params.c_med_by_size[3] = 52.6;
  CHECK(medium_capacity(params, 3) == 52.6);
  CHECK(medium_capacity(params, 4) == 54.4);
  params.default_c_med = -1.0;
  CHECK_THROWS_AS((void)medium_capacity(params, 4), ValidationError);
}
