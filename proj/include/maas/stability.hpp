#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "maas/matching.hpp"

namespace maas {

// Blocking-pair and blocking-group detection over any matching, transient and
// posterior, with multiplicative switching costs, plus the metric suite.
//
// Switching cost applies only to matched participants; an unmatched order
// deviates at any positive gain. The supplier side of a pair uses the choice
// function to decide between underutilization and displacement; a group's
// deviation set is the group itself.

constexpr double kStabEps = 1e-9;

struct PairEntry {
  int edge_id = -1;
  double order_old = 0.0, order_new = 0.0;
  double supplier_old = 0.0, supplier_new = 0.0;
  double displaced_utility = 0.0;
  bool order_unmatched = false;
  bool supplier_underutilized = false;
  bool available = false;
};

struct MemberGain {
  int order_id = 0;
  double old_utility = 0.0, new_utility = 0.0;
  bool unmatched = false;
};

struct GroupEntry {
  int combined_id = -1;
  int size = 0;  // participants: orders + the supplier
  double supplier_old = 0.0, supplier_new = 0.0;
  double displaced_utility = 0.0;
  std::vector<MemberGain> members;
  bool supplier_underutilized = false;
  bool all_orders_unmatched = false;
  bool available = false;
};

struct BlockingReport {
  std::vector<PairEntry> pairs;
  std::vector<GroupEntry> groups;
};

// supplier id + offered edge ids -> accepted edge ids
using SupplierChoiceFn = std::function<std::vector<int>(int, const std::vector<int>&)>;

namespace detail {

inline std::vector<PairEntry> blocking_pairs_impl(const ContractGraph& g, const Matching& m,
                                                  double s, const SupplierChoiceFn& choose) {
  const std::map<int, int> assigned = assignment_by_order(g, m);
  const std::map<int, std::vector<int>> groups = groups_by_supplier(g, m);
  const std::set<int> matched_edges(m.edge_ids.begin(), m.edge_ids.end());

  std::vector<PairEntry> out;
  for (int eid = 0; eid < static_cast<int>(g.edges.size()); ++eid) {
    if (matched_edges.count(eid)) continue;
    const Contract& c = g.edges[eid];

    PairEntry entry;
    entry.edge_id = eid;
    entry.order_new = c.order_utility;
    const auto cur = assigned.find(c.order_id());
    if (cur == assigned.end()) {
      entry.order_unmatched = true;
      if (!(c.order_utility > kStabEps)) continue;  // no positive gain
    } else {
      entry.order_old = g.edges[cur->second].order_utility;
      if (!(c.order_utility > (1.0 + s) * entry.order_old + kStabEps)) continue;
    }

    // supplier side: re-optimize over current contracts plus the candidate
    std::vector<int> offered;
    auto git = groups.find(c.supplier_id());
    if (git != groups.end())
      for (int id : git->second)
        if (g.edges[id].order_id() != c.order_id()) offered.push_back(id);
    offered.push_back(eid);
    const std::vector<int> after = choose(c.supplier_id(), offered);
    if (std::find(after.begin(), after.end(), eid) == after.end()) continue;

    double before_total = 0.0;
    if (git != groups.end())
      for (int id : git->second) before_total += g.edges[id].supplier_utility;
    double after_total = 0.0;
    for (int id : after) after_total += g.edges[id].supplier_utility;
    double displaced = 0.0;
    bool any_displaced = false;
    if (git != groups.end())
      for (int id : git->second)
        if (std::find(after.begin(), after.end(), id) == after.end()) {
          displaced += g.edges[id].supplier_utility;
          any_displaced = true;
        }
    if (!(after_total - before_total > s * displaced + kStabEps)) continue;

    entry.supplier_old = before_total;
    entry.supplier_new = after_total;
    entry.displaced_utility = displaced;
    entry.supplier_underutilized = !any_displaced;
    entry.available = entry.order_unmatched && entry.supplier_underutilized;
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace detail

inline std::vector<PairEntry> find_blocking_pairs(const ContractGraph& g, const Matching& m,
                                                  double switching_cost = 0.0) {
  return detail::blocking_pairs_impl(
      g, m, switching_cost, [&g](int sid, const std::vector<int>& offered) {
        return choice(g, offered, g.capacity.at(sid));
      });
}

// A combination (I, j, C) blocks when the supplier strictly gains by swapping
// its whole assigned set for C and no member is held back: every member is
// either unmatched (with positive gain) or strictly prefers its contract in C.
// A member sitting at its current contract covers the combination, matching
// the covering rows the stage-1 objective minimizes, so the audited count of
// an MWAS matching equals its stage-1 bound.
inline std::vector<GroupEntry> find_blocking_groups(const ContractGraph& g,
                                                    const CombinedGraph& cg, const Matching& m,
                                                    double switching_cost = 0.0) {
  const double s = switching_cost;
  const std::map<int, int> assigned = assignment_by_order(g, m);
  const std::map<int, std::vector<int>> groups = groups_by_supplier(g, m);

  std::vector<GroupEntry> out;
  for (int gid = 0; gid < static_cast<int>(cg.edges.size()); ++gid) {
    const CombinedEdge& e = cg.edges[gid];
    GroupEntry entry;
    entry.combined_id = gid;
    entry.size = e.size() + 1;

    bool all_gain = true;
    bool all_unmatched = true;
    for (std::size_t k = 0; k < e.members.size() && all_gain; ++k) {
      const CombinedMember& mem = e.members[k];
      MemberGain gain;
      gain.order_id = mem.order_id;
      gain.new_utility = mem.order_utility;
      const auto cur = assigned.find(mem.order_id);
      if (cur == assigned.end()) {
        gain.unmatched = true;
        if (!(mem.order_utility > kStabEps)) all_gain = false;
      } else {
        all_unmatched = false;
        gain.old_utility = g.edges[cur->second].order_utility;
        if (!(mem.order_utility > (1.0 + s) * gain.old_utility + kStabEps)) all_gain = false;
      }
      entry.members.push_back(gain);
    }
    if (!all_gain) continue;

    double before_total = 0.0;
    std::vector<int> current;
    auto git = groups.find(e.supplier_id);
    if (git != groups.end()) {
      current = git->second;
      for (int id : current) before_total += g.edges[id].supplier_utility;
    }
    const std::set<int> in_group(e.contract_ids.begin(), e.contract_ids.end());
    double displaced = 0.0;
    bool any_displaced = false;
    for (int id : current)
      if (!in_group.count(id)) {
        displaced += g.edges[id].supplier_utility;
        any_displaced = true;
      }
    const double after_total = e.supplier_utility;
    if (!(after_total - before_total > s * displaced + kStabEps)) continue;

    entry.supplier_old = before_total;
    entry.supplier_new = after_total;
    entry.displaced_utility = displaced;
    entry.supplier_underutilized = !any_displaced;
    entry.all_orders_unmatched = all_unmatched;
    entry.available = all_unmatched && entry.supplier_underutilized;
    out.push_back(std::move(entry));
  }
  return out;
}

// -- posterior stability ----------------------------------------------------

// A union-of-two-periods audit instance. Capacities are the period-t windows
// extended with whatever committed hours arrived in period t+1; cohort maps
// each order to its arrival period (0 = period t, 1 = period t+1).
struct PosteriorInstance {
  ContractGraph graph;
  std::map<int, int> cohort;
  Matching matching;  // the period-t matching in union-graph edge ids
};

// Three constraint families: period-t arrivals against the full window,
// period-(t+1) arrivals against the window minus its first period, and all
// orders together against the full window.
inline bool posterior_feasible(const std::vector<double>& capacity,
                               const std::vector<Job>& jobs_t,
                               const std::vector<Job>& jobs_next) {
  if (!cumulative_feasible(capacity, jobs_t)) return false;
  std::vector<double> tail(capacity.begin() + (capacity.empty() ? 0 : 1), capacity.end());
  std::vector<Job> shifted;
  shifted.reserve(jobs_next.size());
  for (const Job& j : jobs_next) shifted.push_back({j.hours, j.due_period - 1});
  if (!cumulative_feasible(tail, shifted)) return false;
  std::vector<Job> all = jobs_t;
  all.insert(all.end(), jobs_next.begin(), jobs_next.end());
  return cumulative_feasible(capacity, all);
}

inline bool posterior_combo_feasible(const ContractGraph& g, const std::map<int, int>& cohort,
                                     int sid, const std::vector<int>& contract_ids) {
  std::vector<Job> jobs_t, jobs_next;
  for (int id : contract_ids) {
    const Contract& c = g.edges[id];
    Job j{c.production_hours, c.terms.due_period};
    if (cohort.at(c.order_id()) == 0)
      jobs_t.push_back(j);
    else
      jobs_next.push_back(j);
  }
  return posterior_feasible(g.capacity.at(sid), jobs_t, jobs_next);
}

// Choice under the modified (two-cohort) capacity constraint families.
inline std::vector<int> posterior_choice(const ContractGraph& g,
                                         const std::map<int, int>& cohort,
                                         const std::vector<int>& offered, int sid) {
  if (offered.empty()) return {};
  std::vector<int> ids = offered;
  std::sort(ids.begin(), ids.end());
  const auto& capacity = g.capacity.at(sid);
  const int horizon = static_cast<int>(capacity.size());

  {
    std::vector<Job> jobs_t, jobs_next;
    for (int id : ids) {
      const Contract& c = g.edges[id];
      Job j{c.production_hours, c.terms.due_period};
      (cohort.at(c.order_id()) == 0 ? jobs_t : jobs_next).push_back(j);
    }
    if (posterior_feasible(capacity, jobs_t, jobs_next)) return ids;
  }

  BinaryProgram p;
  p.sense = Sense::Maximize;
  for (int id : ids) p.objective.push_back(g.edges[id].supplier_utility);

  auto cum = [&](int from, int upto) {
    double total = 0.0;
    for (int q = from; q <= std::min(upto, horizon); ++q) total += capacity[q - 1];
    return total;
  };
  std::set<int> dues;
  for (int id : ids) dues.insert(std::min(g.edges[id].terms.due_period, horizon));
  for (int q : dues) {
    LinearRow cohort_t, cohort_next, both;
    cohort_t.rhs = cum(1, q);
    cohort_next.rhs = cum(2, q);
    both.rhs = cohort_t.rhs;
    for (int id : ids) {
      const Contract& c = g.edges[id];
      const bool due_in = std::min(c.terms.due_period, horizon) <= q;
      const bool next = cohort.at(c.order_id()) == 1;
      cohort_t.coeffs.push_back(due_in && !next ? c.production_hours : 0.0);
      cohort_next.coeffs.push_back(due_in && next ? c.production_hours : 0.0);
      both.coeffs.push_back(due_in ? c.production_hours : 0.0);
    }
    p.rows.push_back(std::move(cohort_t));
    p.rows.push_back(std::move(cohort_next));
    p.rows.push_back(std::move(both));
  }

  const Solution sol = solve(p);
  std::vector<int> accepted;
  if (sol.status != SolveStatus::Optimal) return accepted;
  for (std::size_t k = 0; k < ids.size(); ++k)
    if (sol.assignment[k]) accepted.push_back(ids[k]);
  return accepted;
}

inline CombinedGraph enumerate_combined_posterior(const PosteriorInstance& inst,
                                                  std::size_t budget = 1000000) {
  return enumerate_combined(inst.graph, budget, [&inst](int sid, const std::vector<int>& ids) {
    return posterior_combo_feasible(inst.graph, inst.cohort, sid, ids);
  });
}

inline BlockingReport posterior_audit(const PosteriorInstance& inst, const CombinedGraph& cg,
                                      double switching_cost = 0.0) {
  BlockingReport report;
  report.pairs = detail::blocking_pairs_impl(
      inst.graph, inst.matching, switching_cost,
      [&inst](int sid, const std::vector<int>& offered) {
        return posterior_choice(inst.graph, inst.cohort, offered, sid);
      });
  report.groups = find_blocking_groups(inst.graph, cg, inst.matching, switching_cost);
  return report;
}

inline BlockingReport posterior_audit(const PosteriorInstance& inst,
                                      double switching_cost = 0.0,
                                      std::size_t budget = 1000000) {
  return posterior_audit(inst, enumerate_combined_posterior(inst, budget), switching_cost);
}

// -- metric suite -------------------------------------------------------------

struct SystemMetrics {
  double impact_of_stability = 1.0;
  double avg_order_utility = 0.0;
  double avg_supplier_utility = 0.0;
  double matched_orders = 0.0;
  double matched_suppliers = 0.0;
  double avg_order_rank = 0.0;
  double avg_supplier_rank = 0.0;
};

inline SystemMetrics compute_system_metrics(const ContractGraph& g, const Matching& m,
                                            double reference_utility, int total_orders,
                                            int total_suppliers) {
  SystemMetrics out;
  out.impact_of_stability = reference_utility > 0.0 ? m.total_utility / reference_utility : 1.0;

  double order_u = 0.0, supplier_u = 0.0;
  for (int id : m.edge_ids) {
    order_u += g.edges[id].order_utility;
    supplier_u += g.edges[id].supplier_utility;
  }
  const std::size_t matched = m.edge_ids.size();
  out.avg_order_utility = matched ? order_u / matched : 0.0;
  out.avg_supplier_utility = matched ? supplier_u / matched : 0.0;
  out.matched_orders = total_orders ? static_cast<double>(matched) / total_orders : 0.0;
  const std::size_t matched_suppliers = groups_by_supplier(g, m).size();
  out.matched_suppliers =
      total_suppliers ? static_cast<double>(matched_suppliers) / total_suppliers : 0.0;

  // percentile rank of the matched contract within each participant's own list
  const std::map<int, int> assigned = assignment_by_order(g, m);
  double order_rank = 0.0;
  for (const auto& [oid, eid] : assigned) {
    std::vector<int> list = g.by_order.at(oid);
    std::sort(list.begin(), list.end(), [&g](int a, int b) {
      if (g.edges[a].order_utility != g.edges[b].order_utility)
        return g.edges[a].order_utility > g.edges[b].order_utility;
      return a < b;
    });
    const auto pos = std::find(list.begin(), list.end(), eid) - list.begin();
    order_rank += list.size() > 1 ? static_cast<double>(pos) / (list.size() - 1) : 0.0;
  }
  out.avg_order_rank = assigned.empty() ? 0.0 : order_rank / assigned.size();

  double supplier_rank = 0.0;
  std::size_t supplier_terms = 0;
  for (const auto& [sid, ids] : groups_by_supplier(g, m)) {
    std::vector<int> list = g.by_supplier.at(sid);
    std::sort(list.begin(), list.end(), [&g](int a, int b) {
      if (g.edges[a].supplier_utility != g.edges[b].supplier_utility)
        return g.edges[a].supplier_utility > g.edges[b].supplier_utility;
      return a < b;
    });
    for (int eid : ids) {
      const auto pos = std::find(list.begin(), list.end(), eid) - list.begin();
      supplier_rank += list.size() > 1 ? static_cast<double>(pos) / (list.size() - 1) : 0.0;
      ++supplier_terms;
    }
  }
  out.avg_supplier_rank = supplier_terms ? supplier_rank / supplier_terms : 0.0;
  return out;
}

struct BlockingMetrics {
  double count = 0.0;
  double orders_in = 0.0;               // fraction of all orders
  double suppliers_in = 0.0;            // fraction of all suppliers
  double per_order = 0.0;               // entries per participating order
  double per_supplier = 0.0;
  double unmatched_orders_in = 0.0;     // among participating orders
  double underutilized_suppliers_in = 0.0;
  double available_fraction = 0.0;
  double avg_order_gain = 0.0;          // relative, matched deviators only
  double avg_supplier_gain = 0.0;
  double avg_size = 2.0;
};

inline BlockingMetrics pair_metrics(const ContractGraph& g, const std::vector<PairEntry>& pairs,
                                    int total_orders, int total_suppliers) {
  BlockingMetrics out;
  out.count = static_cast<double>(pairs.size());
  std::set<int> orders, suppliers, unmatched_orders, underutilized;
  double order_gain = 0.0, supplier_gain = 0.0;
  std::size_t order_gain_n = 0, supplier_gain_n = 0;
  for (const PairEntry& p : pairs) {
    const Contract& c = g.edges[p.edge_id];
    orders.insert(c.order_id());
    suppliers.insert(c.supplier_id());
    if (p.order_unmatched) unmatched_orders.insert(c.order_id());
    if (p.supplier_underutilized) underutilized.insert(c.supplier_id());
    if (p.order_old > kStabEps) {
      order_gain += (p.order_new - p.order_old) / p.order_old;
      ++order_gain_n;
    }
    if (p.supplier_old > kStabEps) {
      supplier_gain += (p.supplier_new - p.supplier_old) / p.supplier_old;
      ++supplier_gain_n;
    }
    if (p.available) out.available_fraction += 1.0;
  }
  if (!pairs.empty()) out.available_fraction /= pairs.size();
  out.orders_in = total_orders ? static_cast<double>(orders.size()) / total_orders : 0.0;
  out.suppliers_in =
      total_suppliers ? static_cast<double>(suppliers.size()) / total_suppliers : 0.0;
  out.per_order = orders.empty() ? 0.0 : out.count / orders.size();
  out.per_supplier = suppliers.empty() ? 0.0 : out.count / suppliers.size();
  out.unmatched_orders_in =
      orders.empty() ? 0.0 : static_cast<double>(unmatched_orders.size()) / orders.size();
  out.underutilized_suppliers_in =
      suppliers.empty() ? 0.0 : static_cast<double>(underutilized.size()) / suppliers.size();
  out.avg_order_gain = order_gain_n ? order_gain / order_gain_n : 0.0;
  out.avg_supplier_gain = supplier_gain_n ? supplier_gain / supplier_gain_n : 0.0;
  out.avg_size = 2.0;
  return out;
}

inline BlockingMetrics group_metrics(const CombinedGraph& cg,
                                     const std::vector<GroupEntry>& groups, int total_orders,
                                     int total_suppliers) {
  BlockingMetrics out;
  out.count = static_cast<double>(groups.size());
  std::set<int> orders, suppliers, unmatched_orders, underutilized;
  double order_gain = 0.0, supplier_gain = 0.0, size_sum = 0.0;
  std::size_t order_gain_n = 0, supplier_gain_n = 0;
  for (const GroupEntry& e : groups) {
    suppliers.insert(cg.edges[e.combined_id].supplier_id);
    if (e.supplier_underutilized) underutilized.insert(cg.edges[e.combined_id].supplier_id);
    for (const MemberGain& m : e.members) {
      orders.insert(m.order_id);
      if (m.unmatched) unmatched_orders.insert(m.order_id);
      if (m.old_utility > kStabEps) {
        order_gain += (m.new_utility - m.old_utility) / m.old_utility;
        ++order_gain_n;
      }
    }
    if (e.supplier_old > kStabEps) {
      supplier_gain += (e.supplier_new - e.supplier_old) / e.supplier_old;
      ++supplier_gain_n;
    }
    if (e.available) out.available_fraction += 1.0;
    size_sum += e.size;
  }
  if (!groups.empty()) out.available_fraction /= groups.size();
  out.orders_in = total_orders ? static_cast<double>(orders.size()) / total_orders : 0.0;
  out.suppliers_in =
      total_suppliers ? static_cast<double>(suppliers.size()) / total_suppliers : 0.0;
  out.per_order = orders.empty() ? 0.0 : out.count / orders.size();
  out.per_supplier = suppliers.empty() ? 0.0 : out.count / suppliers.size();
  out.unmatched_orders_in =
      orders.empty() ? 0.0 : static_cast<double>(unmatched_orders.size()) / orders.size();
  out.underutilized_suppliers_in =
      suppliers.empty() ? 0.0 : static_cast<double>(underutilized.size()) / suppliers.size();
  out.avg_order_gain = order_gain_n ? order_gain / order_gain_n : 0.0;
  out.avg_supplier_gain = supplier_gain_n ? supplier_gain / supplier_gain_n : 0.0;
  out.avg_size = groups.empty() ? 0.0 : size_sum / groups.size();
  return out;
}

}  // namespace maas
