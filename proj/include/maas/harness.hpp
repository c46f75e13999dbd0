#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "maas/auction.hpp"
#include "maas/scenario.hpp"
#include "maas/stability.hpp"

namespace maas {

// The seeded simulation harness: the 15-period matching loop with transient
// and posterior audits, the reverse-auction campaign and the defection
// experiment. Within an instance periods are strictly sequential; instances
// run on disjoint RNG streams.

enum class SolverKind { MW, MWAS, AS };

inline const char* to_string(SolverKind s) {
  switch (s) {
    case SolverKind::MW: return "mw";
    case SolverKind::MWAS: return "mwas";
    case SolverKind::AS: return "as";
  }
  return "?";
}

inline SolverKind solver_from_string(const std::string& s) {
  if (s == "mw") return SolverKind::MW;
  if (s == "mwas") return SolverKind::MWAS;
  if (s == "as") return SolverKind::AS;
  throw ConfigError("unknown solver: " + s);
}

inline MwasFlavor flavor_from_string(const std::string& s) {
  if (s == "max") return MwasFlavor::MaxWeight;
  if (s == "min") return MwasFlavor::MinWeight;
  if (s == "card") return MwasFlavor::MaxCardinality;
  throw ConfigError("unknown flavor: " + s);
}

struct PeriodMetrics {
  int period = 0;
  int arrivals = 0;
  int pool_size = 0;
  int matched = 0;
  int graph_edges = 0;
  int combined_edges = 0;
  double solver_utility = 0.0;
  double mw_utility = 0.0;
  int blocking_lb = -1;  // MWAS stage-1 bound when that solver ran
  SystemMetrics system;
  BlockingMetrics pairs_transient, groups_transient;
  BlockingMetrics pairs_posterior, groups_posterior;
};

struct InstanceResult {
  std::uint64_t seed = 0;
  std::vector<PeriodMetrics> rows;
};

namespace detail {

struct CapacityLedger {
  const ScenarioConfig* cfg = nullptr;
  std::map<int, std::map<int, double>> remaining;  // supplier -> absolute period -> hours

  double& at(int sid, int period) {
    auto& per = remaining[sid];
    auto it = per.find(period);
    if (it == per.end()) it = per.emplace(period, capacity_arrival(*cfg, sid, period)).first;
    return it->second;
  }

  // window t+1 .. t+q as seen at the end of period t
  std::vector<double> window(int sid, int t) {
    std::vector<double> out;
    for (int k = 1; k <= cfg->commit_periods; ++k) out.push_back(at(sid, t + k));
    return out;
  }

  // schedule hours into the latest usable periods before the due date
  void debit(int sid, int t, int due_abs, double hours) {
    const int last = std::min(due_abs, t + cfg->commit_periods);
    for (int period = last; period > t && hours > 1e-12; --period) {
      double& slot = at(sid, period);
      const double take = std::min(slot, hours);
      slot -= take;
      hours -= take;
    }
    if (hours > 1e-9) throw std::logic_error("capacity ledger over-committed");
  }

  void assert_non_negative() const {
    for (const auto& [sid, per] : remaining)
      for (const auto& [period, hours] : per)
        if (hours < -1e-9) throw std::logic_error("negative hours in the capacity ledger");
  }
};

}  // namespace detail

// A single seeded instance of the periodic matching loop. The posterior audit
// for period t is completed once period t+1's arrivals are known; the final
// period's posterior is the degenerate no-arrivals case and equals transient.
// A fixture overrides the generated entities while capacity still arrives
// through the seeded streams.
inline InstanceResult run_matching_instance(ScenarioConfig cfg, SolverKind solver,
                                            MwasFlavor flavor, std::uint64_t seed,
                                            const ScenarioData* fixture = nullptr) {
  cfg.master_seed = seed;
  validate(cfg);
  const ScenarioData data = fixture ? *fixture : generate_scenario(cfg);
  detail::CapacityLedger ledger;
  ledger.cfg = &cfg;

  InstanceResult result;
  result.seed = seed;

  std::vector<Order> pool;
  struct PrevPeriod {
    ContractGraph graph;
    Matching matching;
    int period = 0;
    std::size_t row = 0;
  };
  std::optional<PrevPeriod> prev;

  const auto pricer = [&cfg](const Order& o, const Supplier& s) {
    return price_points(cfg, o, s);
  };

  for (int t = 1; t <= cfg.periods; ++t) {
    PeriodMetrics row;
    row.period = t;

    const auto& arriving = data.arrivals[static_cast<std::size_t>(t - 1)];
    row.arrivals = static_cast<int>(arriving.size());
    pool.insert(pool.end(), arriving.begin(), arriving.end());
    pool.erase(std::remove_if(pool.begin(), pool.end(),
                              [t](const Order& o) { return o.due_period <= t; }),
               pool.end());
    row.pool_size = static_cast<int>(pool.size());

    std::map<int, std::vector<double>> caps;
    for (const Supplier& s : data.suppliers) caps[s.id] = ledger.window(s.id, t);

    const auto quantify = [&cfg, t](const Order& o, const Supplier& s,
                                    const ContractTerms& terms) {
      return quantify_pair(cfg, o, s, terms, t);
    };
    ContractGraph graph = build_graph(pool, data.suppliers, caps, t, pricer, quantify);
    row.graph_edges = static_cast<int>(graph.edges.size());
    CombinedGraph combined = enumerate_combined(graph, cfg.enumeration_budget);
    row.combined_edges = static_cast<int>(combined.edges.size());

    const Matching mw = solve_mw(graph);
    Matching chosen;
    switch (solver) {
      case SolverKind::MW:
        chosen = mw;
        break;
      case SolverKind::AS:
        chosen = solve_as(graph);
        break;
      case SolverKind::MWAS: {
        const MwasResult r = solve_mwas(graph, combined, flavor);
        chosen = r.matching;
        row.blocking_lb = r.blocking_lower_bound;
        break;
      }
    }
    validate_matching(graph, chosen);
    row.matched = static_cast<int>(chosen.edge_ids.size());
    row.solver_utility = chosen.total_utility;
    row.mw_utility = mw.total_utility;
    row.system = compute_system_metrics(graph, chosen, mw.total_utility, row.pool_size,
                                        static_cast<int>(data.suppliers.size()));

    const auto pairs = find_blocking_pairs(graph, chosen, cfg.switching_cost);
    const auto groups = find_blocking_groups(graph, combined, chosen, cfg.switching_cost);
    row.pairs_transient = pair_metrics(graph, pairs, row.pool_size,
                                       static_cast<int>(data.suppliers.size()));
    row.groups_transient = group_metrics(combined, groups, row.pool_size,
                                         static_cast<int>(data.suppliers.size()));

    // posterior audit of the previous period, now that this period's arrivals exist
    if (prev) {
      PosteriorInstance inst;
      inst.graph = prev->graph;
      inst.matching = prev->matching;
      for (const auto& [oid, ids] : inst.graph.by_order) inst.cohort[oid] = 0;
      for (auto& [sid, cap] : inst.graph.capacity)
        cap.push_back(capacity_arrival(cfg, sid, prev->period + cfg.commit_periods + 1));
      for (const Order& o : arriving) {
        const int rel_due = o.due_period - prev->period;
        if (rel_due < 2) continue;  // cannot use the tail window at all
        bool any = false;
        for (const Supplier& s : data.suppliers) {
          const Machine* machine = nullptr;
          for (const Machine& m : s.machines)
            if (capability_match(o, m)) {
              machine = &m;
              break;
            }
          if (!machine) continue;
          const double hours = o.production_time_by_process.at(machine->process);
          if (!posterior_feasible(inst.graph.capacity.at(s.id), {}, {{hours, rel_due}}))
            continue;
          for (double price : pricer(o, s)) {
            ContractTerms terms;
            terms.price = price;
            terms.due_period = rel_due;
            terms.material = o.material;
            terms.process = o.process;
            terms.resolution = o.resolution;
            terms.supplier_id = s.id;
            terms.order_id = o.id;
            auto [ui, uj] = quantify_pair(cfg, o, s, terms, t);
            Contract c;
            c.terms = terms;
            c.order_utility = ui;
            c.supplier_utility = uj;
            c.production_hours = hours;
            inst.graph.add_edge(std::move(c));
            any = true;
          }
        }
        if (any) inst.cohort[o.id] = 1;
      }
      const CombinedGraph post_cg = enumerate_combined_posterior(inst, cfg.enumeration_budget);
      const BlockingReport post = posterior_audit(inst, post_cg, cfg.switching_cost);
      const int post_orders = static_cast<int>(inst.graph.by_order.size());
      auto& prev_row = result.rows[prev->row];
      prev_row.pairs_posterior =
          pair_metrics(inst.graph, post.pairs, post_orders,
                       static_cast<int>(data.suppliers.size()));
      prev_row.groups_posterior = group_metrics(post_cg, post.groups, post_orders,
                                                static_cast<int>(data.suppliers.size()));
    }

    // capacity debits for the accepted contracts
    for (int eid : chosen.edge_ids) {
      const Contract& c = graph.edges[eid];
      ledger.debit(c.supplier_id(), t, t + c.terms.due_period, c.production_hours);
    }
    ledger.assert_non_negative();

    std::set<int> matched_orders;
    for (int eid : chosen.edge_ids) matched_orders.insert(graph.edges[eid].order_id());
    pool.erase(std::remove_if(pool.begin(), pool.end(),
                              [&matched_orders](const Order& o) {
                                return matched_orders.count(o.id) > 0;
                              }),
               pool.end());

    result.rows.push_back(row);
    prev = PrevPeriod{std::move(graph), std::move(chosen), t, result.rows.size() - 1};
  }

  // degenerate posterior for the final period: no further arrivals
  if (!result.rows.empty()) {
    auto& last = result.rows.back();
    last.pairs_posterior = last.pairs_transient;
    last.groups_posterior = last.groups_transient;
  }
  return result;
}

inline int thread_budget() {
  const char* env = std::getenv("MAAS_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n > 0 ? n : 1;
}

// Instances run on disjoint streams; results are collected in seed order.
inline std::vector<InstanceResult> run_periodic_matching(const ScenarioConfig& cfg,
                                                         SolverKind solver, MwasFlavor flavor,
                                                         int instances,
                                                         const ScenarioData* fixture = nullptr) {
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < instances; ++i) seeds.push_back(cfg.master_seed + static_cast<std::uint64_t>(i));
  std::vector<InstanceResult> results(seeds.size());
  const int threads = std::min<int>(thread_budget(), static_cast<int>(seeds.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i)
      results[i] = run_matching_instance(cfg, solver, flavor, seeds[i], fixture);
    return results;
  }
  std::vector<std::future<InstanceResult>> futures;
  for (std::size_t i = 0; i < seeds.size(); ++i)
    futures.push_back(std::async(std::launch::async, [&, i] {
      return run_matching_instance(cfg, solver, flavor, seeds[i], fixture);
    }));
  for (std::size_t i = 0; i < seeds.size(); ++i) results[i] = futures[i].get();
  return results;
}

// -- 95% confidence intervals over instances ---------------------------------

struct Aggregate {
  double mean = 0.0;
  double ci = 0.0;  // half-width
};

inline double t_critical_95(int df) {
  static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306,
                                 2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
                                 2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
                                 2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
  if (df < 1) return 0.0;
  if (df <= 30) return table[df - 1];
  return 1.96;
}

inline Aggregate aggregate(const std::vector<double>& values) {
  Aggregate out;
  if (values.empty()) return out;
  double total = 0.0;
  for (double v : values) total += v;
  out.mean = total / values.size();
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  const double stderr_mean = std::sqrt(ss / (values.size() - 1)) / std::sqrt(values.size());
  out.ci = t_critical_95(static_cast<int>(values.size()) - 1) * stderr_mean;
  return out;
}

// -- reverse-auction campaign --------------------------------------------

struct CampaignConfig {
  ScenarioConfig scenario;
  int attempts = 2000;
  double greediness = 0.5;
  ModulationConfig modulation;
  int max_rebids = 5;
  double market_overshoot = 1.05;  // ceiling of the rebid ladder, relative to market value
  bool min_price_allocator = false;  // directly-competitive benchmark
};

struct AttemptRow {
  int attempt = 0;
  int order_id = 0;
  double bid = 0.0;
  int rounds = 0;
  int rebids = 0;
  int winner_supplier = -1;
  double threshold_price = 0.0;
  double delight_pct = 0.0;
  bool won = false;
};

struct CampaignResult {
  std::vector<AttemptRow> rows;
  std::map<int, int> wins_by_supplier;
  int successful = 0;
  double mean_delight = 0.0;       // over won attempts
  int fair_game_attempts = 0;      // 1-based attempt index when every supplier has won
  std::vector<Supplier> final_pool;
};

// Streams bid requests through the mechanism (or through the min-price
// benchmark) and tracks the §-level campaign metrics.
inline CampaignResult run_auction_campaign(const CampaignConfig& cc, std::uint64_t seed,
                                           std::vector<Supplier> pool) {
  ScenarioConfig cfg = cc.scenario;
  cfg.master_seed = seed;
  if (pool.empty()) {
    for (int i = 0; i < cfg.supplier_count; ++i) pool.push_back(generate_supplier(cfg, i));
  }
  CampaignResult result;
  double delight_total = 0.0;
  std::set<int> have_won;

  for (int attempt = 1; attempt <= cc.attempts; ++attempt) {
    Rng attempt_rng = stream(seed, "auction-attempt", {static_cast<std::uint64_t>(attempt)});
    BidRequest request;
    request.order = generate_order(cfg, 1000000 + attempt, 0);
    request.order.due_period = 1;  // delivery tracked in days below
    request.delivery_day = attempt_rng.uniform_int(2, 5);
    // some designers ask below the floor so bottom-rated suppliers also qualify
    request.min_rating = cfg.rating_min - 0.5 +
                         attempt_rng.uniform(0.0, 0.5 + 0.6 * (cfg.rating_max - cfg.rating_min));
    request.max_rebids = cc.max_rebids;

    AttemptRow row;
    row.attempt = attempt;
    row.order_id = request.order.id;

    QualifiedSet qs = filter_suppliers(request, pool);
    if (qs.n() > 0) {
      price_qualified_set(qs, request, pool, cc.modulation);
      const double recommended = recommend_bid(qs, cc.greediness);
      // the designer climbs from the recommendation toward just above market
      const double ceiling = market_value(qs) * cc.market_overshoot;
      const RebidPolicy policy = [&](int k) {
        const double f = cc.max_rebids > 1
                             ? static_cast<double>(k) / (cc.max_rebids - 1)
                             : 0.0;
        return recommended + (ceiling - recommended) * f;
      };
      Rng auction_rng = stream(seed, "auction-rng", {static_cast<std::uint64_t>(attempt)});
      AuctionOutcome out;
      if (cc.min_price_allocator) {
        // direct competition: the cheapest qualifying machine wins outright
        double prev = 0.0;
        for (int k = 0; k < cc.max_rebids; ++k) {
          const double bid = policy(k);
          if (k > 0 && bid <= prev) throw PolicyViolationError("rebid must increase");
          prev = bid;
          const QualifiedMachine* cheapest = nullptr;
          for (const QualifiedMachine& qm : qs.machines)
            if (!cheapest || qm.threshold_price < cheapest->threshold_price) cheapest = &qm;
          out.bid = bid;
          out.rebids_used = k;
          out.rounds_used = 1;
          const double market = market_value(qs);
          out.delight_pct = market > 0.0 ? 100.0 * (market - bid) / market : 0.0;
          if (cheapest && cheapest->threshold_price < bid) {
            out.won = true;
            out.supplier_id = pool[cheapest->supplier_index].id;
            out.threshold_price = cheapest->threshold_price;
            break;
          }
        }
      } else {
        out = rebid_loop(request, qs, policy, pool, auction_rng);
      }
      row.bid = out.bid;
      row.rounds = out.rounds_used;
      row.rebids = out.rebids_used;
      row.won = out.won;
      row.winner_supplier = out.supplier_id;
      row.threshold_price = out.threshold_price;
      row.delight_pct = out.delight_pct;
      if (out.won) {
        ++result.successful;
        delight_total += out.delight_pct;
        ++result.wins_by_supplier[out.supplier_id];
        have_won.insert(out.supplier_id);
        if (result.fair_game_attempts == 0 &&
            have_won.size() == pool.size())
          result.fair_game_attempts = attempt;
      }
    }
    result.rows.push_back(row);
  }
  result.mean_delight = result.successful ? delight_total / result.successful : 0.0;
  result.final_pool = std::move(pool);
  return result;
}

// Coalition experiment helper: members re-register as the highest-rated one.
inline std::vector<Supplier> merge_suppliers(std::vector<Supplier> pool,
                                             const std::set<int>& member_ids) {
  std::vector<Supplier> out;
  std::optional<Supplier> merged;
  for (Supplier& s : pool) {
    if (!member_ids.count(s.id)) {
      out.push_back(std::move(s));
      continue;
    }
    if (!merged) {
      merged = std::move(s);
      continue;
    }
    if (s.rating > merged->rating) {
      std::swap(merged->id, s.id);
      std::swap(merged->rating, s.rating);
    }
    for (Machine& m : s.machines) merged->machines.push_back(std::move(m));
    merged->materials_in_stock.insert(s.materials_in_stock.begin(),
                                      s.materials_in_stock.end());
  }
  if (merged) out.push_back(std::move(*merged));
  std::sort(out.begin(), out.end(),
            [](const Supplier& a, const Supplier& b) { return a.id < b.id; });
  return out;
}

// -- defection experiment --------------------------------------------------

enum class AccessMode { Complete, Restricted };

struct DefectionRow {
  int period = 0;
  int participants = 0;
  int defectors = 0;
  double realized_utility = 0.0;
  double mw_utility = 0.0;
};

struct DefectionResult {
  std::vector<DefectionRow> rows;
  double realized_total = 0.0;
  double mw_total = 0.0;
};

// Socially optimal allocation each period, then one final (non-tentative)
// proposal round in which orders may defect to suppliers they can identify.
// Restricted access grows each client's known-supplier set with every
// completed transaction.
inline DefectionResult run_defection(ScenarioConfig cfg, AccessMode mode, std::uint64_t seed,
                                     int periods) {
  cfg.master_seed = seed;
  cfg.periods = periods;
  validate(cfg);
  const ScenarioData data = generate_scenario(cfg);
  detail::CapacityLedger ledger;
  ledger.cfg = &cfg;

  DefectionResult result;
  std::vector<Order> pool;
  std::map<int, std::set<int>> known;  // client -> supplier ids transacted with

  const auto pricer = [&cfg](const Order& o, const Supplier& s) {
    return price_points(cfg, o, s);
  };

  for (int t = 1; t <= cfg.periods; ++t) {
    const auto& arriving = data.arrivals[static_cast<std::size_t>(t - 1)];
    pool.insert(pool.end(), arriving.begin(), arriving.end());
    pool.erase(std::remove_if(pool.begin(), pool.end(),
                              [t](const Order& o) { return o.due_period <= t; }),
               pool.end());

    std::map<int, std::vector<double>> caps;
    for (const Supplier& s : data.suppliers) caps[s.id] = ledger.window(s.id, t);
    const auto quantify = [&cfg, t](const Order& o, const Supplier& s,
                                    const ContractTerms& terms) {
      return quantify_pair(cfg, o, s, terms, t);
    };
    const ContractGraph graph = build_graph(pool, data.suppliers, caps, t, pricer, quantify);
    const Matching mw = solve_mw(graph);
    const std::map<int, int> assigned = assignment_by_order(graph, mw);
    const std::map<int, std::vector<int>> held = groups_by_supplier(graph, mw);

    std::map<int, int> client_of;
    for (const Order& o : pool) client_of[o.id] = o.client_id;

    // one proposal per order to its best reachable contract
    std::map<int, std::vector<int>> proposals;  // supplier -> proposed edge ids
    std::map<int, int> proposed_edge;           // order -> edge id
    for (const auto& [oid, edge_ids] : graph.by_order) {
      int best = -1;
      for (int eid : edge_ids) {
        const Contract& c = graph.edges[eid];
        if (mode == AccessMode::Restricted &&
            !known[client_of[oid]].count(c.supplier_id()))
          continue;
        if (best < 0 || c.order_utility > graph.edges[best].order_utility + kStabEps)
          best = eid;
      }
      if (best < 0) continue;
      const auto cur = assigned.find(oid);
      if (cur != assigned.end()) {
        if (best == cur->second) continue;  // keeping the platform match
        if (graph.edges[best].order_utility <=
            graph.edges[cur->second].order_utility + kStabEps)
          continue;  // no strict improvement outside
      } else if (!(graph.edges[best].order_utility > kStabEps)) {
        continue;
      }
      proposals[graph.edges[best].supplier_id()].push_back(best);
      proposed_edge[oid] = best;
    }

    // each supplier chooses over its platform contracts plus the proposals
    std::map<int, std::set<int>> accepted_by_supplier;
    for (const Supplier& s : data.suppliers) {
      std::vector<int> offered;
      auto h = held.find(s.id);
      if (h != held.end()) offered = h->second;
      auto p = proposals.find(s.id);
      if (p != proposals.end()) {
        for (int eid : p->second) {
          // a proposing order replaces its own held contract at this supplier
          offered.erase(std::remove_if(offered.begin(), offered.end(),
                                       [&](int held_id) {
                                         return graph.edges[held_id].order_id() ==
                                                graph.edges[eid].order_id();
                                       }),
                        offered.end());
          offered.push_back(eid);
        }
      }
      if (offered.empty()) continue;
      const std::vector<int> acc = choice(graph, offered, graph.capacity.at(s.id));
      accepted_by_supplier[s.id] = std::set<int>(acc.begin(), acc.end());
    }

    // final allocation: successful proposals leave the platform; everyone else
    // keeps the platform contract if it survived the supplier's re-choice
    DefectionRow row;
    row.period = t;
    row.participants = static_cast<int>(pool.size());
    std::vector<int> final_edges;
    for (const auto& [oid, edge_ids] : graph.by_order) {
      const auto prop = proposed_edge.find(oid);
      if (prop != proposed_edge.end()) {
        const Contract& c = graph.edges[prop->second];
        const auto& acc = accepted_by_supplier[c.supplier_id()];
        if (acc.count(prop->second)) {
          final_edges.push_back(prop->second);
          if (assigned.count(oid)) ++row.defectors;
          continue;
        }
      }
      const auto cur = assigned.find(oid);
      if (cur == assigned.end()) continue;
      const Contract& c = graph.edges[cur->second];
      const auto& acc = accepted_by_supplier[c.supplier_id()];
      if (acc.count(cur->second)) final_edges.push_back(cur->second);
    }

    double realized = 0.0;
    std::set<int> served;
    for (int eid : final_edges) {
      const Contract& c = graph.edges[eid];
      realized += c.total_utility();
      ledger.debit(c.supplier_id(), t, t + c.terms.due_period, c.production_hours);
      served.insert(c.order_id());
      known[client_of[c.order_id()]].insert(c.supplier_id());
    }
    row.realized_utility = realized;
    row.mw_utility = mw.total_utility;
    result.rows.push_back(row);
    result.realized_total += realized;
    result.mw_total += mw.total_utility;

    pool.erase(std::remove_if(pool.begin(), pool.end(),
                              [&served](const Order& o) { return served.count(o.id) > 0; }),
               pool.end());
  }
  return result;
}

}  // namespace maas
