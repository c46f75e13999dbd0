#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "maas/core.hpp"
#include "maas/errors.hpp"
#include "maas/rng.hpp"

namespace maas {

// Name-your-own-price reverse auction: filtration, threshold pricing with
// optional modulation, bid recommendation via the greediness index, two-stage
// randomized supplier selection and the rebid loop.

struct BidRequest {
  Order order;
  double min_rating = 1.0;           // suppliers must rate strictly above this
  std::optional<double> bid;         // set after recommendation
  int max_rebids = 5;                // total bid attempts per order
  int delivery_day = 0;              // days from now; derived from the order when 0
};

inline int delivery_day_of(const BidRequest& request) {
  if (request.delivery_day > 0) return request.delivery_day;
  return std::max(1, request.order.due_period / kPeriodsPerDay);
}

struct QualifiedMachine {
  int supplier_index = 0;  // into the supplier pool
  int machine_index = 0;   // into that supplier's machine list
  double threshold_price = 0.0;
};

struct QualifiedSupplier {
  int supplier_index = 0;
  std::vector<int> machine_slots;  // indexes into QualifiedSet::machines
};

struct QualifiedSet {
  std::vector<QualifiedSupplier> suppliers;  // l1
  std::vector<QualifiedMachine> machines;

  int n() const { return static_cast<int>(suppliers.size()); }
  int h() const { return static_cast<int>(machines.size()); }
};

inline double daily_availability(const Machine& m, int day) {
  const int base = (day - 1) * kPeriodsPerDay;
  double total = 0.0;
  for (int k = 0; k < kPeriodsPerDay; ++k) {
    const int idx = base + k;
    if (idx < static_cast<int>(m.capacity_by_period.size()))
      total += m.capacity_by_period[idx];
  }
  return total;
}

// Availability summed up to one day before delivery (one day is reserved for
// shipping). Strictly more hours than the approximate print time are required.
inline bool machine_available(const Machine& m, double print_hours, int delivery_day) {
  double total = 0.0;
  for (int day = 1; day < delivery_day; ++day) total += daily_availability(m, day);
  return total > print_hours;
}

// Step 1 keeps suppliers rated strictly above the requested minimum, step 2
// matches capability, step 3 checks availability before the delivery date.
inline QualifiedSet filter_suppliers(const BidRequest& request,
                                     const std::vector<Supplier>& suppliers) {
  QualifiedSet qs;
  const int delivery = delivery_day_of(request);
  for (std::size_t si = 0; si < suppliers.size(); ++si) {
    const Supplier& s = suppliers[si];
    if (!(s.rating > request.min_rating)) continue;
    QualifiedSupplier entry;
    entry.supplier_index = static_cast<int>(si);
    for (std::size_t mi = 0; mi < s.machines.size(); ++mi) {
      const Machine& m = s.machines[mi];
      if (!capability_match(request.order, m)) continue;
      const auto it = request.order.production_time_by_process.find(m.process);
      if (it == request.order.production_time_by_process.end()) continue;
      if (!machine_available(m, it->second, delivery)) continue;
      entry.machine_slots.push_back(static_cast<int>(qs.machines.size()));
      qs.machines.push_back({static_cast<int>(si), static_cast<int>(mi), 0.0});
    }
    if (!entry.machine_slots.empty()) qs.suppliers.push_back(std::move(entry));
  }
  return qs;
}

enum class Modulation { Rating, Availability, Urgency };

struct ModulationConfig {
  std::vector<Modulation> active;
  double rating_min = 1.0, rating_max = 5.0;
  double avail_min = 0.5, avail_max = 16.0;  // average hours per day
  double days_min = 1.0, days_max = 7.0;
};

namespace detail {

// increasing interpolation over sqrt of the driver: a at x_min, b at x_max
inline double sqrt_up(double x, double lo, double hi, double a, double b) {
  x = std::clamp(x, lo, hi);
  const double t = (std::sqrt(x) - std::sqrt(lo)) / (std::sqrt(hi) - std::sqrt(lo));
  return a + (b - a) * t;
}

// mirrored form: b at x_min, a at x_max (inverse-sqrt interpolation)
inline double sqrt_down(double x, double lo, double hi, double a, double b) {
  lo = std::max(lo, 1e-9);
  x = std::clamp(x, lo, hi);
  const auto inv = [](double v) { return 1.0 / std::sqrt(v); };
  const double t = (inv(x) - inv(hi)) / (inv(lo) - inv(hi));
  return a + (b - a) * t;
}

}  // namespace detail

// Unit threshold price for one machine given the active modulations, times the
// part's material volume, floored at the machine's minimum order price.
inline double threshold_price(const Machine& machine, const Order& order,
                              double supplier_rating, int delivery_day,
                              const ModulationConfig& mod) {
  const double a = machine.unit_threshold_band.low;
  const double b = machine.unit_threshold_band.high;
  double thp;
  if (mod.active.empty()) {
    thp = 0.5 * (a + b);
  } else {
    double total = 0.0;
    for (Modulation m : mod.active) {
      switch (m) {
        case Modulation::Rating:
          total += detail::sqrt_up(supplier_rating, mod.rating_min, mod.rating_max, a, b);
          break;
        case Modulation::Availability: {
          double avg = 0.0;
          const int days = std::max(1, delivery_day - 1);
          for (int d = 1; d <= days; ++d) avg += daily_availability(machine, d);
          avg /= days;
          total += detail::sqrt_down(avg, mod.avail_min, mod.avail_max, a, b);
          break;
        }
        case Modulation::Urgency:
          total += detail::sqrt_down(delivery_day, mod.days_min, mod.days_max, a, b);
          break;
      }
    }
    thp = total / static_cast<double>(mod.active.size());
  }
  const double p = thp * order.part_volume;
  return std::max(p, machine.min_order_price);
}

inline void price_qualified_set(QualifiedSet& qs, const BidRequest& request,
                                const std::vector<Supplier>& suppliers,
                                const ModulationConfig& mod) {
  const int delivery = delivery_day_of(request);
  for (QualifiedMachine& qm : qs.machines) {
    const Supplier& s = suppliers[qm.supplier_index];
    qm.threshold_price =
        threshold_price(s.machines[qm.machine_index], request.order, s.rating, delivery, mod);
  }
}

// Y = a + (b - a) * sqrt(I) between the min and max qualifying threshold price.
inline double recommend_bid(const QualifiedSet& qs, double greediness) {
  if (qs.h() == 0) throw NoSupplierError("no qualifying machine to recommend a bid");
  double lo = qs.machines[0].threshold_price, hi = lo;
  for (const QualifiedMachine& m : qs.machines) {
    lo = std::min(lo, m.threshold_price);
    hi = std::max(hi, m.threshold_price);
  }
  return lo + (hi - lo) * std::sqrt(std::clamp(greediness, 0.0, 1.0));
}

inline double market_value(const QualifiedSet& qs) {
  double hi = 0.0;
  for (const QualifiedMachine& m : qs.machines) hi = std::max(hi, m.threshold_price);
  return hi;
}

struct AuctionOutcome {
  bool won = false;
  int supplier_id = -1;
  int machine_id = -1;
  double threshold_price = 0.0;
  double bid = 0.0;
  int rounds_used = 0;
  int rebids_used = 0;
  double delight_pct = 0.0;  // designer's delight at the final bid
};

inline double smoothed_success_rate(const SuccessCounters& c) {
  // Laplace smoothing keeps unselected suppliers on an equal initial footing
  return static_cast<double>(c.first_round_wins + 1) /
         static_cast<double>(c.first_round_selections + 2);
}

// One bid attempt. Round 1 picks uniformly and is the only round that updates
// success counters; later rounds weight the remaining suppliers by success
// rate. A supplier meets the bid when some qualifying machine has p < b, and
// then sells on the machine with the highest such threshold price.
inline AuctionOutcome run_auction(const BidRequest& request, const QualifiedSet& qs,
                                  std::vector<Supplier>& suppliers, Rng& rng) {
  if (qs.n() < 1) throw NoSupplierError("auction requires at least one qualified supplier");
  if (!request.bid) throw PolicyViolationError("bid not set on request");
  const double bid = *request.bid;

  AuctionOutcome out;
  out.bid = bid;
  const double market = market_value(qs);
  out.delight_pct = market > 0.0 ? 100.0 * (market - bid) / market : 0.0;

  auto best_meeting_machine = [&](const QualifiedSupplier& entry) -> const QualifiedMachine* {
    const QualifiedMachine* best = nullptr;
    for (int slot : entry.machine_slots) {
      const QualifiedMachine& qm = qs.machines[slot];
      if (qm.threshold_price < bid &&
          (!best || qm.threshold_price > best->threshold_price))
        best = &qm;
    }
    return best;
  };

  std::vector<int> remaining(qs.suppliers.size());
  for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = static_cast<int>(i);

  for (int round = 0; !remaining.empty(); ++round) {
    std::size_t pick;
    if (round == 0) {
      pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(remaining.size()) - 1));
    } else {
      std::vector<double> weights;
      weights.reserve(remaining.size());
      for (int idx : remaining)
        weights.push_back(smoothed_success_rate(
            suppliers[qs.suppliers[idx].supplier_index].success_counters));
      pick = rng.pick_weighted(weights);
    }
    const QualifiedSupplier& entry = qs.suppliers[remaining[pick]];
    Supplier& s = suppliers[entry.supplier_index];
    const QualifiedMachine* meets = best_meeting_machine(entry);
    if (round == 0) {
      ++s.success_counters.first_round_selections;
      if (meets) ++s.success_counters.first_round_wins;
    }
    ++out.rounds_used;
    if (meets) {
      out.won = true;
      out.supplier_id = s.id;
      out.machine_id = s.machines[meets->machine_index].id;
      out.threshold_price = meets->threshold_price;
      return out;
    }
    remaining.erase(remaining.begin() + static_cast<long>(pick));
  }
  return out;  // exhausted every supplier
}

// Bid for attempt k (0-based); must be strictly increasing in k.
using RebidPolicy = std::function<double(int attempt)>;

inline AuctionOutcome rebid_loop(BidRequest request, const QualifiedSet& qs,
                                 const RebidPolicy& policy, std::vector<Supplier>& suppliers,
                                 Rng& rng) {
  AuctionOutcome last;
  double prev = 0.0;
  for (int attempt = 0; attempt < request.max_rebids; ++attempt) {
    const double bid = policy(attempt);
    if (attempt > 0 && bid <= prev)
      throw PolicyViolationError("rebid must strictly exceed the previous bid");
    prev = bid;
    request.bid = bid;
    last = run_auction(request, qs, suppliers, rng);
    last.rebids_used = attempt;
    if (last.won) return last;
  }
  return last;
}

}  // namespace maas
