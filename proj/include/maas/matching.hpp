#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "maas/core.hpp"
#include "maas/errors.hpp"
#include "maas/solver.hpp"

namespace maas {

// Contract-graph construction and the three allocation solvers: the socially
// optimal max-weight matching, the two-stage max-weight approximately stable
// matching over combined-order vertices, and the cumulative offer process with
// a capacity-constrained choice function.
//
// Due periods on graph edges are 1-indexed relative to the capacity window:
// due_period = 1 means producible only in the first committed period.

struct ContractGraph {
  std::vector<Contract> edges;
  std::map<int, std::vector<int>> by_order;     // order id -> edge ids
  std::map<int, std::vector<int>> by_supplier;  // supplier id -> edge ids
  std::map<int, std::vector<double>> capacity;  // supplier id -> committed hours

  int add_edge(Contract c) {
    const int id = static_cast<int>(edges.size());
    by_order[c.order_id()].push_back(id);
    by_supplier[c.supplier_id()].push_back(id);
    edges.push_back(std::move(c));
    return id;
  }
};

struct Matching {
  std::vector<int> edge_ids;  // ascending
  double total_utility = 0.0;

  bool empty() const { return edge_ids.empty(); }
};

inline Matching make_matching(const ContractGraph& g, std::vector<int> edge_ids) {
  std::sort(edge_ids.begin(), edge_ids.end());
  Matching m;
  m.edge_ids = std::move(edge_ids);
  for (int id : m.edge_ids) m.total_utility += g.edges[id].total_utility();
  return m;
}

inline std::map<int, int> assignment_by_order(const ContractGraph& g, const Matching& m) {
  std::map<int, int> out;
  for (int id : m.edge_ids) out[g.edges[id].order_id()] = id;
  return out;
}

inline std::map<int, std::vector<int>> groups_by_supplier(const ContractGraph& g,
                                                          const Matching& m) {
  std::map<int, std::vector<int>> out;
  for (int id : m.edge_ids) out[g.edges[id].supplier_id()].push_back(id);
  return out;
}

// Post-hoc invariant check: one contract per order, every supplier group
// cumulative-capacity feasible.
inline void validate_matching(const ContractGraph& g, const Matching& m) {
  std::set<int> seen;
  for (int id : m.edge_ids) {
    if (id < 0 || id >= static_cast<int>(g.edges.size()))
      throw std::logic_error("matching references an unknown edge");
    if (!seen.insert(g.edges[id].order_id()).second)
      throw std::logic_error("order matched twice");
  }
  for (const auto& [sid, ids] : groups_by_supplier(g, m)) {
    std::vector<Job> jobs;
    for (int id : ids) jobs.push_back({g.edges[id].production_hours, g.edges[id].terms.due_period});
    auto cap = g.capacity.find(sid);
    if (cap == g.capacity.end() || !cumulative_feasible(cap->second, jobs))
      throw std::logic_error("matching violates supplier capacity");
  }
}

// prices offered between a pair, one contract per price point
using PairPricer = std::function<std::vector<double>(const Order&, const Supplier&)>;
// (order utility, supplier utility) for given terms
using PairQuantifier =
    std::function<std::pair<double, double>(const Order&, const Supplier&, const ContractTerms&)>;

// Edges are exactly the capability- and capacity-feasible contracts, each
// carrying both participants' utilities. `current_period` anchors relative due
// dates: an order due next period gets due_period 1.
inline ContractGraph build_graph(const std::vector<Order>& orders,
                                 const std::vector<Supplier>& suppliers,
                                 const std::map<int, std::vector<double>>& capacity,
                                 int current_period, const PairPricer& prices,
                                 const PairQuantifier& quantify) {
  ContractGraph g;
  g.capacity = capacity;
  for (const Supplier& s : suppliers)
    if (!g.capacity.count(s.id)) g.capacity[s.id] = {};
  for (const Order& o : orders) {
    const int rel_due = o.due_period - current_period;
    if (rel_due < 1) continue;
    for (const Supplier& s : suppliers) {
      const Machine* machine = nullptr;
      for (const Machine& m : s.machines)
        if (capability_match(o, m)) {
          machine = &m;
          break;
        }
      if (!machine) continue;
      const auto t = o.production_time_by_process.find(machine->process);
      if (t == o.production_time_by_process.end()) continue;
      const double hours = t->second;
      const auto& cap = g.capacity.at(s.id);
      if (!cumulative_feasible(cap, {{hours, rel_due}})) continue;
      for (double price : prices(o, s)) {
        Contract c;
        c.terms.price = price;
        c.terms.due_period = rel_due;
        c.terms.material = o.material;
        c.terms.process = o.process;
        c.terms.resolution = o.resolution;
        c.terms.supplier_id = s.id;
        c.terms.order_id = o.id;
        c.production_hours = hours;
        auto [ui, uj] = quantify(o, s, c.terms);
        c.order_utility = ui;
        c.supplier_utility = uj;
        g.add_edge(std::move(c));
      }
    }
  }
  return g;
}

// -- capacity-constrained choice ---------------------------------------------

// Maximizes the supplier's own utility over the offered contracts subject to
// the per-period cumulative capacity rows. Offers must not share an order.
inline std::vector<int> choice(const ContractGraph& g, const std::vector<int>& offered,
                               const std::vector<double>& capacity) {
  if (offered.empty()) return {};
  std::set<int> orders_seen;
  for (int id : offered)
    if (!orders_seen.insert(g.edges[id].order_id()).second)
      throw std::logic_error("choice offered two contracts of one order");

  std::vector<int> ids = offered;
  std::sort(ids.begin(), ids.end());

  // utilities are non-negative, so a jointly feasible offer set is optimal whole
  {
    std::vector<Job> all;
    all.reserve(ids.size());
    for (int id : ids) all.push_back({g.edges[id].production_hours, g.edges[id].terms.due_period});
    if (cumulative_feasible(capacity, all)) return ids;
  }

  BinaryProgram p;
  p.sense = Sense::Maximize;
  for (int id : ids) p.objective.push_back(g.edges[id].supplier_utility);

  std::set<int> dues;
  const int horizon = static_cast<int>(capacity.size());
  for (int id : ids) dues.insert(std::min(g.edges[id].terms.due_period, horizon));
  double cum = 0.0;
  std::map<int, double> cum_at;
  {
    double run = 0.0;
    for (int q = 1; q <= horizon; ++q) {
      run += capacity[q - 1];
      cum_at[q] = run;
    }
    cum = run;
  }
  for (int q : dues) {
    LinearRow row;
    row.relation = Relation::LessEq;
    row.rhs = q >= horizon ? cum : cum_at.count(q) ? cum_at[q] : 0.0;
    for (int id : ids)
      row.coeffs.push_back(std::min(g.edges[id].terms.due_period, horizon) <= q
                               ? g.edges[id].production_hours
                               : 0.0);
    p.rows.push_back(std::move(row));
  }

  const Solution s = solve(p);
  std::vector<int> accepted;
  if (s.status != SolveStatus::Optimal) return accepted;  // cannot happen: empty set feasible
  for (std::size_t k = 0; k < ids.size(); ++k)
    if (s.assignment[k]) accepted.push_back(ids[k]);
  return accepted;
}

// -- maximum weight -----------------------------------------------------------

namespace detail {

// connected components over order/supplier vertices
inline std::vector<std::vector<int>> edge_components(
    const std::vector<std::pair<long long, long long>>& endpoints, std::size_t edge_count) {
  std::map<long long, long long> parent;
  std::function<long long(long long)> find = [&](long long x) {
    auto it = parent.find(x);
    if (it == parent.end() || it->second == x) {
      parent[x] = x;
      return x;
    }
    return parent[x] = find(it->second);
  };
  for (const auto& [a, b] : endpoints) parent[find(a)] = find(b);
  std::map<long long, std::vector<int>> grouped;
  for (std::size_t e = 0; e < edge_count; ++e)
    grouped[find(endpoints[e].first)].push_back(static_cast<int>(e));
  std::vector<std::vector<int>> out;
  for (auto& [root, ids] : grouped) out.push_back(std::move(ids));
  return out;
}

inline long long order_node(int id) { return 2LL * id; }
inline long long supplier_node(int id) { return 2LL * id + 1; }

}  // namespace detail

// max sum of u_ijc over accepted edges, one contract per order, capacity rows
// per supplier and due period; solved per connected component
inline Matching solve_mw(const ContractGraph& g) {
  std::vector<std::pair<long long, long long>> endpoints;
  endpoints.reserve(g.edges.size());
  for (const Contract& c : g.edges)
    endpoints.push_back({detail::order_node(c.order_id()), detail::supplier_node(c.supplier_id())});
  std::vector<int> chosen;
  for (std::vector<int> comp : detail::edge_components(endpoints, g.edges.size())) {
    // among a pair's price points only the highest-total one can matter here
    {
      std::map<std::pair<int, int>, int> best;
      for (int id : comp) {
        const auto key = std::make_pair(g.edges[id].order_id(), g.edges[id].supplier_id());
        auto it = best.find(key);
        if (it == best.end() ||
            g.edges[id].total_utility() > g.edges[it->second].total_utility() + 1e-12)
          best[key] = id;
      }
      std::vector<int> kept;
      for (const auto& [key, id] : best) kept.push_back(id);
      std::sort(kept.begin(), kept.end());
      comp = std::move(kept);
    }
    BinaryProgram p;
    p.sense = Sense::Maximize;
    for (int id : comp) p.objective.push_back(g.edges[id].total_utility());

    std::map<int, std::vector<std::size_t>> by_order, by_supplier;
    for (std::size_t k = 0; k < comp.size(); ++k) {
      by_order[g.edges[comp[k]].order_id()].push_back(k);
      by_supplier[g.edges[comp[k]].supplier_id()].push_back(k);
    }
    for (const auto& [oid, ks] : by_order) {
      LinearRow row;
      row.relation = Relation::LessEq;
      row.rhs = 1.0;
      row.coeffs.assign(comp.size(), 0.0);
      for (std::size_t k : ks) row.coeffs[k] = 1.0;
      p.rows.push_back(std::move(row));
    }
    for (const auto& [sid, ks] : by_supplier) {
      const auto& cap = g.capacity.at(sid);
      const int horizon = static_cast<int>(cap.size());
      std::set<int> dues;
      for (std::size_t k : ks) dues.insert(std::min(g.edges[comp[k]].terms.due_period, horizon));
      for (int q : dues) {
        LinearRow row;
        row.relation = Relation::LessEq;
        row.rhs = 0.0;
        for (int t = 0; t < std::min(q, horizon); ++t) row.rhs += cap[t];
        row.coeffs.assign(comp.size(), 0.0);
        for (std::size_t k : ks)
          if (std::min(g.edges[comp[k]].terms.due_period, horizon) <= q)
            row.coeffs[k] = g.edges[comp[k]].production_hours;
        p.rows.push_back(std::move(row));
      }
    }
    const Solution s = solve(p);
    if (s.status != SolveStatus::Optimal)
      throw std::logic_error("max-weight program must be feasible");
    for (std::size_t k = 0; k < comp.size(); ++k)
      if (s.assignment[k]) chosen.push_back(comp[k]);
  }
  return make_matching(g, std::move(chosen));
}

// -- combined graph for MWAS ----------------------------------------------

struct CombinedMember {
  int order_id = 0;
  double order_utility = 0.0;
};

struct CombinedEdge {
  int supplier_id = 0;
  std::vector<int> contract_ids;         // into ContractGraph.edges, ascending order id
  std::vector<CombinedMember> members;   // parallel to contract_ids
  double supplier_utility = 0.0;
  double order_utility = 0.0;

  double total_utility() const { return supplier_utility + order_utility; }
  int size() const { return static_cast<int>(members.size()); }
};

struct CombinedGraph {
  std::vector<CombinedEdge> edges;
  std::map<int, std::vector<int>> by_supplier;  // supplier id -> combined edge ids
  std::map<int, std::vector<int>> by_order;     // order id -> combined edge ids
};

// Largest number of candidate orders the supplier could serve, via the exact
// optimizer over the per-period cumulative constraints.
inline int supplier_order_bound(const std::vector<Job>& candidates,
                                const std::vector<double>& capacity) {
  if (candidates.empty()) return 0;
  BinaryProgram p;
  p.sense = Sense::Maximize;
  p.objective.assign(candidates.size(), 1.0);
  const int horizon = static_cast<int>(capacity.size());
  std::set<int> dues;
  for (const Job& j : candidates) dues.insert(std::min(j.due_period, horizon));
  for (int q : dues) {
    LinearRow row;
    row.relation = Relation::LessEq;
    row.rhs = 0.0;
    for (int t = 0; t < std::min(q, horizon); ++t) row.rhs += capacity[t];
    for (const Job& j : candidates)
      row.coeffs.push_back(std::min(j.due_period, horizon) <= q ? j.hours : 0.0);
    p.rows.push_back(std::move(row));
  }
  const Solution s = solve(p);
  return s.status == SolveStatus::Optimal ? static_cast<int>(std::lround(s.value)) : 0;
}

// feasibility test for a growing combination of contracts at one supplier
using ComboFeasibility =
    std::function<bool(int supplier_id, const std::vector<int>& contract_ids)>;

// All capacity-feasible contract combinations per supplier, up to the
// supplier's order-count bound. Deterministic order; throws BudgetError when
// the configured edge budget is exceeded.
inline CombinedGraph enumerate_combined(const ContractGraph& g, std::size_t budget,
                                        const ComboFeasibility& feasible) {
  CombinedGraph cg;
  for (const auto& [sid, edge_ids] : g.by_supplier) {
    const auto& capacity = g.capacity.at(sid);
    // candidate orders ascending, each with its contract edges
    std::map<int, std::vector<int>> contracts_of;
    for (int id : edge_ids) contracts_of[g.edges[id].order_id()].push_back(id);
    std::vector<int> order_ids;
    std::vector<Job> jobs;
    for (const auto& [oid, ids] : contracts_of) {
      order_ids.push_back(oid);
      jobs.push_back({g.edges[ids.front()].production_hours,
                      g.edges[ids.front()].terms.due_period});
    }
    const int bound = supplier_order_bound(jobs, capacity);

    std::vector<int> picked;  // contract edge ids
    std::function<void(std::size_t)> recurse = [&](std::size_t next) {
      if (!picked.empty()) {
        CombinedEdge e;
        e.supplier_id = sid;
        e.contract_ids = picked;
        for (int id : picked) {
          e.members.push_back({g.edges[id].order_id(), g.edges[id].order_utility});
          e.order_utility += g.edges[id].order_utility;
          e.supplier_utility += g.edges[id].supplier_utility;
        }
        if (cg.edges.size() >= budget)
          throw BudgetError("combined-graph enumeration budget exceeded");
        const int eid = static_cast<int>(cg.edges.size());
        cg.by_supplier[sid].push_back(eid);
        for (const CombinedMember& m : e.members) cg.by_order[m.order_id].push_back(eid);
        cg.edges.push_back(std::move(e));
      }
      if (static_cast<int>(picked.size()) >= bound) return;
      for (std::size_t k = next; k < order_ids.size(); ++k) {
        for (int id : contracts_of[order_ids[k]]) {
          picked.push_back(id);
          if (feasible(sid, picked)) recurse(k + 1);
          picked.pop_back();
        }
      }
    };
    recurse(0);
  }
  return cg;
}

inline CombinedGraph enumerate_combined(const ContractGraph& g,
                                        std::size_t budget = 1000000) {
  return enumerate_combined(g, budget, [&g](int sid, const std::vector<int>& ids) {
    std::vector<Job> jobs;
    jobs.reserve(ids.size());
    for (int id : ids) jobs.push_back({g.edges[id].production_hours, g.edges[id].terms.due_period});
    return cumulative_feasible(g.capacity.at(sid), jobs);
  });
}

// -- MWAS ----------------------------------------------------------------

enum class MwasFlavor { MaxWeight, MinWeight, MaxCardinality };

struct MwasResult {
  Matching matching;
  int blocking_lower_bound = 0;
  MwasFlavor flavor = MwasFlavor::MaxWeight;
};

namespace detail {

constexpr double kUtilEps = 1e-9;

// Exact two-stage search over one connected component of the combined graph.
// Stage 1 finds the minimum number of uncovered (blocking) combinations by
// iterative deepening; stage 2 optimizes the requested flavor subject to it.
class MwasComponentSolver {
 public:
  MwasComponentSolver(const CombinedGraph& cg, const std::vector<int>& edge_ids)
      : cg_(cg), edge_ids_(edge_ids) {
    std::set<int> suppliers;
    for (int id : edge_ids_) suppliers.insert(cg_.edges[id].supplier_id);
    suppliers_.assign(suppliers.begin(), suppliers.end());
    supplier_pos_.clear();
    for (std::size_t k = 0; k < suppliers_.size(); ++k) supplier_pos_[suppliers_[k]] = k;

    edges_of_.resize(suppliers_.size());
    for (int id : edge_ids_) edges_of_[supplier_pos_[cg_.edges[id].supplier_id]].push_back(id);
    for (auto& list : edges_of_)
      std::sort(list.begin(), list.end(), [this](int a, int b) {
        const double ua = cg_.edges[a].supplier_utility;
        const double ub = cg_.edges[b].supplier_utility;
        if (ua != ub) return ua > ub;
        return a < b;
      });

    for (int id : edge_ids_)
      for (const CombinedMember& m : cg_.edges[id].members) {
        auto& best = best_offer_[m.order_id];
        const std::size_t sp = supplier_pos_[cg_.edges[id].supplier_id];
        auto it = best.find(sp);
        if (it == best.end() || m.order_utility > it->second) best[sp] = m.order_utility;
      }

    decided_.assign(suppliers_.size(), false);
    chosen_.assign(suppliers_.size(), -1);
  }

  int minimize_blocking() {
    for (int target = 0;; ++target) {
      target_ = target;
      found_ = false;
      stage2_ = false;
      dfs(0);
      if (found_) return target;
    }
  }

  std::vector<int> optimize(MwasFlavor flavor, int lb) {
    target_ = lb;
    stage2_ = true;
    flavor_ = flavor;
    best_obj_ = flavor == MwasFlavor::MinWeight ? std::numeric_limits<double>::infinity()
                                                : -std::numeric_limits<double>::infinity();
    best_choice_.clear();
    found_ = false;
    dfs(0);
    return best_choice_;
  }

 private:
  bool covered(int eid) const {
    const CombinedEdge& e = cg_.edges[eid];
    const std::size_t sp = supplier_pos_.at(e.supplier_id);
    if (decided_[sp] && chosen_[sp] >= 0 &&
        cg_.edges[chosen_[sp]].supplier_utility >= e.supplier_utility - kUtilEps)
      return true;
    for (const CombinedMember& m : e.members) {
      auto it = assigned_.find(m.order_id);
      if (it != assigned_.end() && it->second >= m.order_utility - kUtilEps) return true;
    }
    return false;
  }

  // An edge of a decided supplier that no remaining decision can cover: its
  // supplier choice is final, its assigned members sit below their bars, and
  // no undecided supplier can lift an unassigned member to its bar.
  bool doomed(int eid) const {
    if (covered(eid)) return false;
    const CombinedEdge& e = cg_.edges[eid];
    for (const CombinedMember& m : e.members) {
      if (assigned_.count(m.order_id)) continue;
      const auto& offers = best_offer_.at(m.order_id);
      for (const auto& [sp, best] : offers)
        if (!decided_[sp] && best >= m.order_utility - kUtilEps) return false;
    }
    return true;
  }

  int doomed_count() const {
    int count = 0;
    for (std::size_t k = 0; k < suppliers_.size(); ++k) {
      if (!decided_[k]) continue;
      for (int eid : edges_of_[k])
        if (doomed(eid)) ++count;
    }
    return count;
  }

  double flavor_value(int eid) const {
    switch (flavor_) {
      case MwasFlavor::MaxWeight:
      case MwasFlavor::MinWeight:
        return cg_.edges[eid].total_utility();
      case MwasFlavor::MaxCardinality:
        return static_cast<double>(cg_.edges[eid].size());
    }
    return 0.0;
  }

  double optimistic_remaining(std::size_t from) const {
    if (flavor_ == MwasFlavor::MinWeight) return 0.0;
    double total = 0.0;
    for (std::size_t k = from; k < suppliers_.size(); ++k) {
      double best = 0.0;
      for (int eid : edges_of_[k]) best = std::max(best, flavor_value(eid));
      total += best;
    }
    return total;
  }

  void dfs(std::size_t k) {
    if (found_ && !stage2_) return;  // stage 1 stops at the first witness
    if (doomed_count() > target_) return;
    if (stage2_) {
      const bool maximizing = flavor_ != MwasFlavor::MinWeight;
      if (maximizing && cur_obj_ + optimistic_remaining(k) <= best_obj_ + kUtilEps && found_)
        return;
      if (!maximizing && cur_obj_ >= best_obj_ - kUtilEps && found_) return;
    }
    if (k == suppliers_.size()) {
      if (stage2_) {
        const bool maximizing = flavor_ != MwasFlavor::MinWeight;
        const bool better = !found_ || (maximizing ? cur_obj_ > best_obj_ + kUtilEps
                                                   : cur_obj_ < best_obj_ - kUtilEps);
        if (better) {
          best_obj_ = cur_obj_;
          best_choice_.clear();
          for (std::size_t s = 0; s < suppliers_.size(); ++s)
            if (chosen_[s] >= 0) best_choice_.push_back(chosen_[s]);
        }
      }
      found_ = true;
      return;
    }
    // try each edge of supplier k whose orders are all free, then "none"
    for (int eid : edges_of_[k]) {
      const CombinedEdge& e = cg_.edges[eid];
      bool free = true;
      for (const CombinedMember& m : e.members)
        if (assigned_.count(m.order_id)) {
          free = false;
          break;
        }
      if (!free) continue;
      decided_[k] = true;
      chosen_[k] = eid;
      for (const CombinedMember& m : e.members) assigned_[m.order_id] = m.order_utility;
      cur_obj_ += flavor_value(eid);
      dfs(k + 1);
      cur_obj_ -= flavor_value(eid);
      for (const CombinedMember& m : e.members) assigned_.erase(m.order_id);
      chosen_[k] = -1;
      decided_[k] = false;
      if (found_ && !stage2_) return;
    }
    decided_[k] = true;
    dfs(k + 1);
    decided_[k] = false;
  }

  const CombinedGraph& cg_;
  const std::vector<int>& edge_ids_;
  std::vector<int> suppliers_;
  std::map<int, std::size_t> supplier_pos_;
  std::vector<std::vector<int>> edges_of_;
  std::map<int, std::map<std::size_t, double>> best_offer_;  // order -> supplier pos -> best u_i

  std::vector<bool> decided_;
  std::vector<int> chosen_;
  std::map<int, double> assigned_;  // order id -> assigned member utility
  int target_ = 0;
  bool stage2_ = false;
  bool found_ = false;
  MwasFlavor flavor_ = MwasFlavor::MaxWeight;
  double cur_obj_ = 0.0;
  double best_obj_ = 0.0;
  std::vector<int> best_choice_;
};

}  // namespace detail

// Stage 1 minimizes the number of blocking combinations; stage 2 re-optimizes
// the requested flavor with the blocking count held at that lower bound. The
// instance decomposes exactly over connected components.
inline MwasResult solve_mwas(const ContractGraph& g, const CombinedGraph& cg,
                             MwasFlavor flavor = MwasFlavor::MaxWeight) {
  std::map<long long, long long> parent;
  std::function<long long(long long)> find = [&](long long x) {
    auto it = parent.find(x);
    if (it == parent.end() || it->second == x) {
      parent[x] = x;
      return x;
    }
    return parent[x] = find(it->second);
  };
  for (const CombinedEdge& e : cg.edges)
    for (const CombinedMember& m : e.members)
      parent[find(detail::supplier_node(e.supplier_id))] = find(detail::order_node(m.order_id));
  std::map<long long, std::vector<int>> comps;
  for (std::size_t i = 0; i < cg.edges.size(); ++i)
    comps[find(detail::supplier_node(cg.edges[i].supplier_id))].push_back(static_cast<int>(i));

  MwasResult out;
  out.flavor = flavor;
  std::vector<int> contracts;
  for (auto& [root, ids] : comps) {
    detail::MwasComponentSolver solver(cg, ids);
    const int lb = solver.minimize_blocking();
    out.blocking_lower_bound += lb;
    for (int eid : solver.optimize(flavor, lb))
      for (int cid : cg.edges[eid].contract_ids) contracts.push_back(cid);
  }
  out.matching = make_matching(g, std::move(contracts));
  return out;
}

// -- approximately stable (cumulative offer process) -----------------------

// Rejected orders propose down their ranked contract lists; suppliers re-run
// `choice` over everything tentatively held. Terminates because each proposal
// consumes a list entry.
inline Matching solve_as(const ContractGraph& g) {
  std::map<int, std::vector<int>> ranked;  // order id -> edge ids best-first
  for (const auto& [oid, ids] : g.by_order) {
    std::vector<int> list = ids;
    std::sort(list.begin(), list.end(), [&g](int a, int b) {
      const Contract& x = g.edges[a];
      const Contract& y = g.edges[b];
      if (x.order_utility != y.order_utility) return x.order_utility > y.order_utility;
      if (x.supplier_id() != y.supplier_id()) return x.supplier_id() < y.supplier_id();
      return x.terms.price < y.terms.price;
    });
    ranked[oid] = std::move(list);
  }

  std::map<int, std::size_t> next_rank;
  std::vector<int> rejected;
  for (const auto& [oid, list] : ranked) {
    next_rank[oid] = 0;
    rejected.push_back(oid);
  }
  std::map<int, std::vector<int>> tentative;  // supplier id -> held edge ids

  while (!rejected.empty()) {
    std::sort(rejected.begin(), rejected.end());
    rejected.erase(std::unique(rejected.begin(), rejected.end()), rejected.end());
    std::map<int, std::vector<int>> proposals;
    for (int oid : rejected) {
      auto& pos = next_rank[oid];
      const auto& list = ranked[oid];
      if (pos >= list.size()) continue;  // exhausted, permanently unmatched
      const int eid = list[pos++];
      proposals[g.edges[eid].supplier_id()].push_back(eid);
    }
    rejected.clear();
    if (proposals.empty()) break;
    for (auto& [sid, incoming] : proposals) {
      std::vector<int> offered = tentative[sid];
      offered.insert(offered.end(), incoming.begin(), incoming.end());
      std::vector<int> accepted = choice(g, offered, g.capacity.at(sid));
      std::set<int> kept(accepted.begin(), accepted.end());
      for (int eid : offered)
        if (!kept.count(eid)) rejected.push_back(g.edges[eid].order_id());
      tentative[sid] = std::move(accepted);
    }
  }

  std::vector<int> all;
  for (const auto& [sid, ids] : tentative) all.insert(all.end(), ids.begin(), ids.end());
  return make_matching(g, std::move(all));
}

}  // namespace maas
