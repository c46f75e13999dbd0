#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <set>

#include "maas/rng.hpp"
#include "maas/stability.hpp"

using namespace maas;

namespace {

Contract edge(int order, int supplier, double hours, int due, double ui, double uj,
              double price = 100.0) {
  Contract c;
  c.terms.order_id = order;
  c.terms.supplier_id = supplier;
  c.terms.price = price;
  c.terms.due_period = due;
  c.production_hours = hours;
  c.order_utility = ui;
  c.supplier_utility = uj;
  return c;
}

// ---- independent slow re-checker (shares no code with the auditor) ---------

bool slow_feasible(const std::vector<double>& cap,
                   const std::vector<std::pair<double, int>>& jobs) {
  for (std::size_t q = 1; q <= cap.size(); ++q) {
    double avail = 0.0;
    for (std::size_t t = 0; t < q; ++t) avail += cap[t];
    double need = 0.0;
    for (const auto& [hours, due] : jobs)
      if (static_cast<std::size_t>(std::min<int>(due, static_cast<int>(cap.size()))) <= q)
        need += hours;
    if (need > avail + 1e-9) return false;
  }
  return true;
}

std::vector<int> slow_choice(const ContractGraph& g, std::vector<int> offered,
                             const std::vector<double>& cap) {
  std::sort(offered.begin(), offered.end());
  double best = -1.0;
  std::vector<int> best_set;
  const int n = static_cast<int>(offered.size());
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::vector<std::pair<double, int>> jobs;
    double value = 0.0;
    std::vector<int> subset;
    for (int k = 0; k < n; ++k)
      if (mask & (1u << k)) {
        jobs.push_back({g.edges[offered[k]].production_hours,
                        g.edges[offered[k]].terms.due_period});
        value += g.edges[offered[k]].supplier_utility;
        subset.push_back(offered[k]);
      }
    if (!slow_feasible(cap, jobs)) continue;
    if (value > best + 1e-12) {
      best = value;
      best_set = subset;
    }
  }
  return best_set;
}

bool slow_is_blocking_pair(const ContractGraph& g, const Matching& m, int eid, double s) {
  const Contract& c = g.edges[eid];
  for (int id : m.edge_ids)
    if (id == eid) return false;

  double old_u = -1.0;
  for (int id : m.edge_ids)
    if (g.edges[id].order_id() == c.order_id()) old_u = g.edges[id].order_utility;
  if (old_u < 0.0) {
    if (!(c.order_utility > 1e-9)) return false;
  } else if (!(c.order_utility > (1.0 + s) * old_u + 1e-9)) {
    return false;
  }

  std::vector<int> held;
  for (int id : m.edge_ids)
    if (g.edges[id].supplier_id() == c.supplier_id()) held.push_back(id);
  std::vector<int> offered;
  for (int id : held)
    if (g.edges[id].order_id() != c.order_id()) offered.push_back(id);
  offered.push_back(eid);
  const std::vector<int> after = slow_choice(g, offered, g.capacity.at(c.supplier_id()));
  if (std::find(after.begin(), after.end(), eid) == after.end()) return false;
  double before_u = 0.0, after_u = 0.0, displaced = 0.0;
  for (int id : held) before_u += g.edges[id].supplier_utility;
  for (int id : after) after_u += g.edges[id].supplier_utility;
  for (int id : held)
    if (std::find(after.begin(), after.end(), id) == after.end())
      displaced += g.edges[id].supplier_utility;
  return after_u - before_u > s * displaced + 1e-9;
}

bool slow_is_blocking_group(const ContractGraph& g, const CombinedGraph& cg, const Matching& m,
                            int gid, double s) {
  const CombinedEdge& e = cg.edges[gid];
  std::map<int, int> assigned;
  for (int id : m.edge_ids) assigned[g.edges[id].order_id()] = id;

  for (std::size_t k = 0; k < e.members.size(); ++k) {
    const CombinedMember& mem = e.members[k];
    auto it = assigned.find(mem.order_id);
    if (it == assigned.end()) {
      if (!(mem.order_utility > 1e-9)) return false;
    } else {
      const double old_u = g.edges[it->second].order_utility;
      if (!(mem.order_utility > (1.0 + s) * old_u + 1e-9)) return false;
    }
  }

  double before_u = 0.0, displaced = 0.0;
  for (int id : m.edge_ids)
    if (g.edges[id].supplier_id() == e.supplier_id) {
      before_u += g.edges[id].supplier_utility;
      if (std::find(e.contract_ids.begin(), e.contract_ids.end(), id) == e.contract_ids.end())
        displaced += g.edges[id].supplier_utility;
    }
  return e.supplier_utility - before_u > s * displaced + 1e-9;
}

// uncovered combinations in the stage-1 covering sense
int slow_uncovered_count(const ContractGraph& g, const CombinedGraph& cg, const Matching& m) {
  std::map<int, int> assigned;
  std::map<int, double> supplier_total;
  for (int id : m.edge_ids) {
    assigned[g.edges[id].order_id()] = id;
    supplier_total[g.edges[id].supplier_id()] += g.edges[id].supplier_utility;
  }
  int count = 0;
  for (const CombinedEdge& e : cg.edges) {
    bool covered = false;
    auto st = supplier_total.find(e.supplier_id);
    if (st != supplier_total.end() && st->second >= e.supplier_utility - 1e-9) covered = true;
    for (const CombinedMember& mem : e.members) {
      if (covered) break;
      auto it = assigned.find(mem.order_id);
      if (it != assigned.end() &&
          g.edges[it->second].order_utility >= mem.order_utility - 1e-9)
        covered = true;
    }
    if (!covered) ++count;
  }
  return count;
}

ContractGraph random_instance(Rng& rng, int max_orders = 6, int max_suppliers = 3) {
  ContractGraph g;
  const int ns = rng.uniform_int(1, max_suppliers);
  const int no = rng.uniform_int(2, max_orders);
  for (int s = 1; s <= ns; ++s) {
    std::vector<double> cap;
    const int periods = rng.uniform_int(1, 3);
    for (int q = 0; q < periods; ++q) cap.push_back(rng.uniform(2.0, 8.0));
    g.capacity[s] = cap;
  }
  for (int o = 1; o <= no; ++o) {
    const double hours = rng.uniform(2.0, 6.0);
    for (int s = 1; s <= ns; ++s) {
      if (rng.bernoulli(0.35)) continue;
      const auto& cap = g.capacity[s];
      const int due = rng.uniform_int(1, static_cast<int>(cap.size()));
      if (!cumulative_feasible(cap, {{hours, due}})) continue;
      const int contracts = rng.uniform_int(1, 2);
      for (int k = 0; k < contracts; ++k)
        g.add_edge(edge(o, s, hours, due, rng.next_double(), rng.next_double(),
                        100.0 + 10.0 * k));
    }
  }
  return g;
}

}  // namespace

TEST_CASE("everyone unmatched yields one available blocking pair") {
  ContractGraph g;
  g.capacity[1] = {9.0};
  g.add_edge(edge(1, 1, 4.0, 1, 0.6, 0.7));
  Matching empty;
  const auto pairs = find_blocking_pairs(g, empty);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].order_unmatched);
  CHECK(pairs[0].supplier_underutilized);
  CHECK(pairs[0].available);

  // the singleton group agrees with the pair when the supplier holds nothing
  const CombinedGraph cg = enumerate_combined(g);
  const auto groups = find_blocking_groups(g, cg, empty);
  REQUIRE(groups.size() == 1);
  CHECK(groups[0].available);
  CHECK(groups[0].size == 2);
}

TEST_CASE("max-weight can sacrifice the supplier's favourite and create a blocking pair") {
  ContractGraph g;
  g.capacity[1] = {5.0};  // fits one job
  g.add_edge(edge(1, 1, 4.0, 1, 0.2, 0.9));  // supplier's favourite, total 1.1
  g.add_edge(edge(2, 1, 4.0, 1, 0.9, 0.3));  // socially optimal, total 1.2
  const Matching mw = solve_mw(g);
  REQUIRE(mw.edge_ids == std::vector<int>{1});
  const auto pairs = find_blocking_pairs(g, mw);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].edge_id == 0);
  CHECK(pairs[0].order_unmatched);
  CHECK_FALSE(pairs[0].supplier_underutilized);  // displaces the assigned order
  CHECK_FALSE(pairs[0].available);
}

TEST_CASE("auditor agrees with the independent slow predicates") {
  Rng rng(1234);
  for (int trial = 0; trial < 60; ++trial) {
    const ContractGraph g = random_instance(rng);
    const CombinedGraph cg = enumerate_combined(g);
    const double s = rng.bernoulli(0.5) ? 0.0 : rng.uniform(0.0, 0.5);
    const Matching m = rng.bernoulli(0.5) ? solve_mw(g) : solve_as(g);

    const auto pairs = find_blocking_pairs(g, m, s);
    std::set<int> reported;
    for (const PairEntry& p : pairs) {
      reported.insert(p.edge_id);
      CHECK(slow_is_blocking_pair(g, m, p.edge_id, s));  // soundness
    }
    for (int eid = 0; eid < static_cast<int>(g.edges.size()); ++eid)
      CHECK(reported.count(eid) == (slow_is_blocking_pair(g, m, eid, s) ? 1u : 0u));

    const auto groups = find_blocking_groups(g, cg, m, s);
    std::set<int> reported_groups;
    for (const GroupEntry& e : groups) {
      reported_groups.insert(e.combined_id);
      CHECK(slow_is_blocking_group(g, cg, m, e.combined_id, s));
    }
    for (int gid = 0; gid < static_cast<int>(cg.edges.size()); ++gid)
      CHECK(reported_groups.count(gid) ==
            (slow_is_blocking_group(g, cg, m, gid, s) ? 1u : 0u));
  }
}

TEST_CASE("MW and MWAS never leave an available blocking pair or group") {
  Rng rng(777);
  for (int trial = 0; trial < 50; ++trial) {
    const ContractGraph g = random_instance(rng);
    const CombinedGraph cg = enumerate_combined(g);
    const Matching mw = solve_mw(g);
    const MwasResult mwas = solve_mwas(g, cg, MwasFlavor::MaxWeight);
    for (const Matching* m : {&mw, &mwas.matching}) {
      for (const PairEntry& p : find_blocking_pairs(g, *m)) CHECK_FALSE(p.available);
      for (const GroupEntry& e : find_blocking_groups(g, cg, *m)) CHECK_FALSE(e.available);
    }
  }
}

TEST_CASE("stage-1 bound equals the uncovered count of the MWAS matching") {
  Rng rng(31337);
  for (int trial = 0; trial < 50; ++trial) {
    const ContractGraph g = random_instance(rng, 5, 3);
    const CombinedGraph cg = enumerate_combined(g);
    if (cg.edges.size() > 80) continue;
    const MwasResult r = solve_mwas(g, cg, MwasFlavor::MaxWeight);
    CHECK(slow_uncovered_count(g, cg, r.matching) == r.blocking_lower_bound);
    // the audited group count agrees with the bound (continuous utilities)
    CHECK(static_cast<int>(find_blocking_groups(g, cg, r.matching).size()) ==
          r.blocking_lower_bound);
  }
}

TEST_CASE("reports shrink monotonically in the switching cost") {
  Rng rng(2222);
  for (int trial = 0; trial < 30; ++trial) {
    const ContractGraph g = random_instance(rng);
    const CombinedGraph cg = enumerate_combined(g);
    const Matching mw = solve_mw(g);
    std::set<int> prev_pairs, prev_groups;
    bool first = true;
    for (double s : {0.0, 0.1, 0.3, 0.6, 1.0, 2.0}) {
      std::set<int> pair_ids, group_ids;
      for (const PairEntry& p : find_blocking_pairs(g, mw, s)) pair_ids.insert(p.edge_id);
      for (const GroupEntry& e : find_blocking_groups(g, cg, mw, s))
        group_ids.insert(e.combined_id);
      if (!first) {
        for (int id : pair_ids) CHECK(prev_pairs.count(id) == 1);
        for (int id : group_ids) CHECK(prev_groups.count(id) == 1);
      }
      prev_pairs = pair_ids;
      prev_groups = group_ids;
      first = false;
    }
  }
}

TEST_CASE("posterior audit with no next-period arrivals equals the transient audit") {
  Rng rng(555);
  for (int trial = 0; trial < 25; ++trial) {
    const ContractGraph g = random_instance(rng);
    const Matching m = solve_as(g);

    PosteriorInstance inst;
    inst.graph = g;
    inst.matching = m;
    for (const auto& [oid, ids] : g.by_order) inst.cohort[oid] = 0;
    const BlockingReport post = posterior_audit(inst);

    const auto pairs = find_blocking_pairs(g, m);
    const CombinedGraph cg = enumerate_combined(g);
    const auto groups = find_blocking_groups(g, cg, m);
    CHECK(post.pairs.size() == pairs.size());
    CHECK(post.groups.size() == groups.size());
  }
}

TEST_CASE("posterior counts dominate transient counts") {
  Rng rng(909);
  for (int trial = 0; trial < 25; ++trial) {
    ContractGraph g = random_instance(rng);
    const Matching m = solve_mw(g);
    const auto transient_pairs = find_blocking_pairs(g, m);
    const CombinedGraph cg = enumerate_combined(g);
    const auto transient_groups = find_blocking_groups(g, cg, m);

    // next period: new orders over the same suppliers plus extended capacity
    PosteriorInstance inst;
    inst.graph = g;
    inst.matching = m;
    for (const auto& [oid, ids] : g.by_order) inst.cohort[oid] = 0;
    for (auto& [sid, cap] : inst.graph.capacity) cap.push_back(rng.uniform(0.0, 6.0));
    const int extra = rng.uniform_int(1, 3);
    for (int k = 0; k < extra; ++k) {
      const int oid = 1000 + k;
      bool added = false;
      for (const auto& [sid, cap] : inst.graph.capacity) {
        if (rng.bernoulli(0.4)) continue;
        const int due = rng.uniform_int(2, static_cast<int>(cap.size()));
        Contract c = edge(oid, sid, rng.uniform(2.0, 5.0), due, rng.next_double(),
                          rng.next_double());
        std::vector<Job> next_only = {{c.production_hours, c.terms.due_period}};
        if (!posterior_feasible(cap, {}, next_only)) continue;
        inst.graph.add_edge(std::move(c));
        added = true;
      }
      if (added) inst.cohort[oid] = 1;
    }

    const BlockingReport post = posterior_audit(inst);
    CHECK(post.pairs.size() >= transient_pairs.size());
    CHECK(post.groups.size() >= transient_groups.size());
  }
}

TEST_CASE("system metrics report the obvious aggregates") {
  ContractGraph g;
  g.capacity[1] = {9.0};
  g.capacity[2] = {9.0};
  g.add_edge(edge(1, 1, 4.0, 1, 0.6, 0.8));
  g.add_edge(edge(2, 2, 4.0, 1, 0.4, 0.6));
  const Matching m = solve_mw(g);
  const SystemMetrics sm = compute_system_metrics(g, m, m.total_utility, 2, 2);
  CHECK(sm.impact_of_stability == Catch::Approx(1.0));
  CHECK(sm.matched_orders == Catch::Approx(1.0));
  CHECK(sm.matched_suppliers == Catch::Approx(1.0));
  CHECK(sm.avg_order_utility == Catch::Approx(0.5));
  CHECK(sm.avg_supplier_utility == Catch::Approx(0.7));
  CHECK(sm.avg_order_rank == Catch::Approx(0.0));  // everyone got their only contract
}

TEST_CASE("blocking metrics fractions stay in range") {
  Rng rng(4242);
  for (int trial = 0; trial < 20; ++trial) {
    const ContractGraph g = random_instance(rng);
    const CombinedGraph cg = enumerate_combined(g);
    const Matching m = solve_mw(g);
    const auto pairs = find_blocking_pairs(g, m);
    const auto groups = find_blocking_groups(g, cg, m);
    const int orders = static_cast<int>(g.by_order.size());
    const int suppliers = static_cast<int>(g.capacity.size());
    for (const BlockingMetrics& bm : {pair_metrics(g, pairs, orders, suppliers),
                                      group_metrics(cg, groups, orders, suppliers)}) {
      CHECK(bm.orders_in >= 0.0);
      CHECK(bm.orders_in <= 1.0);
      CHECK(bm.suppliers_in >= 0.0);
      CHECK(bm.suppliers_in <= 1.0);
      CHECK(bm.unmatched_orders_in <= 1.0);
      CHECK(bm.available_fraction <= 1.0);
    }
  }
}
