#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "maas/errors.hpp"

namespace maas {

// One period is 12 hours of wall clock; per-day availability is represented
// with 2 periods per day in the same capacity vector.
inline constexpr double kHoursPerPeriod = 12.0;
inline constexpr int kPeriodsPerDay = 2;

enum class Process { FDM, SLA, SlsPolymer, SlsMetal, MaterialJetting, DLP, MJP };

inline const char* to_string(Process p) {
  switch (p) {
    case Process::FDM: return "FDM";
    case Process::SLA: return "SLA";
    case Process::SlsPolymer: return "SLS-polymer";
    case Process::SlsMetal: return "SLS-metal";
    case Process::MaterialJetting: return "MaterialJetting";
    case Process::DLP: return "DLP";
    case Process::MJP: return "MJP";
  }
  return "?";
}

inline Process process_from_string(const std::string& s) {
  if (s == "FDM") return Process::FDM;
  if (s == "SLA") return Process::SLA;
  if (s == "SLS-polymer") return Process::SlsPolymer;
  if (s == "SLS-metal") return Process::SlsMetal;
  if (s == "MaterialJetting") return Process::MaterialJetting;
  if (s == "DLP") return Process::DLP;
  if (s == "MJP") return Process::MJP;
  throw ConfigError("unknown process: " + s);
}

enum class SizeClass { Small, Medium, Large };

inline const char* to_string(SizeClass s) {
  switch (s) {
    case SizeClass::Small: return "small";
    case SizeClass::Medium: return "medium";
    case SizeClass::Large: return "large";
  }
  return "?";
}

inline SizeClass size_class_from_string(const std::string& s) {
  if (s == "small") return SizeClass::Small;
  if (s == "medium") return SizeClass::Medium;
  if (s == "large") return SizeClass::Large;
  throw ConfigError("unknown size class: " + s);
}

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
};

struct ResolutionRange {
  double min_microns = 0.0;
  double max_microns = 0.0;
};

// (a, b) currency per cm^3 with a <= b
struct ThresholdBand {
  double low = 0.0;
  double high = 0.0;
};

struct Machine {
  int id = 0;
  Process process = Process::FDM;
  std::set<std::string> materials;
  ResolutionRange resolution_range;
  std::vector<double> capacity_by_period;  // hours, length = commitment horizon
  ThresholdBand unit_threshold_band;
  double min_order_price = 0.0;
};

struct SuccessCounters {
  long first_round_selections = 0;
  long first_round_wins = 0;
};

struct Supplier {
  int id = 0;
  double rating = 5.0;  // in [1, 5]
  std::vector<Machine> machines;
  SizeClass size_class = SizeClass::Small;
  GeoPoint location;
  SuccessCounters success_counters;
  std::set<std::string> materials_in_stock;  // inventory used by supplier-side utility
};

struct Order {
  int id = 0;
  double part_volume = 0.0;  // cm^3
  std::map<Process, double> production_time_by_process;  // hours
  std::string material;
  Process process = Process::FDM;
  double resolution = 0.0;  // microns
  int arrival_period = 0;
  int due_period = 0;
  SizeClass size_preference = SizeClass::Small;
  GeoPoint location;
  int client_id = 0;  // persistent requester identity, used by the defection experiment
};

inline void validate(const Machine& m) {
  if (m.unit_threshold_band.low > m.unit_threshold_band.high)
    throw ConfigError("machine threshold band a > b");
  if (m.resolution_range.min_microns > m.resolution_range.max_microns)
    throw ConfigError("machine resolution min > max");
  for (double c : m.capacity_by_period)
    if (c < 0.0) throw ConfigError("negative machine capacity");
}

inline void validate(const Supplier& s) {
  if (s.rating < 1.0 || s.rating > 5.0) throw ConfigError("supplier rating outside [1,5]");
  if (s.machines.empty()) throw ConfigError("supplier without machines");
  if (s.success_counters.first_round_selections < 0 ||
      s.success_counters.first_round_wins < 0 ||
      s.success_counters.first_round_wins > s.success_counters.first_round_selections)
    throw ConfigError("inconsistent success counters");
  for (const Machine& m : s.machines) validate(m);
}

inline void validate(const Order& o) {
  if (o.part_volume <= 0.0) throw ConfigError("order volume must be positive");
  if (o.due_period <= o.arrival_period) throw ConfigError("order due before arrival");
  for (const auto& [p, t] : o.production_time_by_process)
    if (t <= 0.0) throw ConfigError("non-positive production time");
}

// -- capability / capacity ----------------------------------------------------

inline bool capability_match(const Order& order, const Machine& machine) {
  if (machine.process != order.process) return false;
  if (machine.materials.find(order.material) == machine.materials.end()) return false;
  return order.resolution >= machine.resolution_range.min_microns &&
         order.resolution <= machine.resolution_range.max_microns;
}

// Sum of capacity over periods 1..upto_period (1-indexed).
inline double cumulative_capacity(const Machine& machine, int upto_period) {
  if (upto_period < 0 || upto_period > static_cast<int>(machine.capacity_by_period.size()))
    throw HorizonError("period beyond commitment horizon");
  double total = 0.0;
  for (int q = 0; q < upto_period; ++q) total += machine.capacity_by_period[q];
  return total;
}

struct Job {
  double hours = 0.0;
  int due_period = 0;  // 1-indexed within the capacity window
};

// True iff, for every period q, hours of the jobs due on or before q fit in
// the machine's cumulative capacity up to q. Due dates past the committed
// horizon only require the full committed capacity.
inline bool cumulative_feasible(const Machine& machine, const std::vector<Job>& jobs) {
  const int horizon = static_cast<int>(machine.capacity_by_period.size());
  double cum = 0.0;
  double used = 0.0;
  for (int q = 1; q <= horizon; ++q) {
    cum += machine.capacity_by_period[q - 1];
    used = 0.0;
    for (const Job& j : jobs) {
      const int due = std::min(j.due_period, horizon);
      if (due <= q) used += j.hours;
    }
    if (used > cum + 1e-9) return false;
  }
  return true;
}

// Same test over a bare capacity vector (a supplier's committed hours).
inline bool cumulative_feasible(const std::vector<double>& capacity,
                                const std::vector<Job>& jobs) {
  Machine m;
  m.capacity_by_period = capacity;
  return cumulative_feasible(m, jobs);
}

// -- contracts ----------------------------------------------------------------

// Terms of one negotiable contract between an order and a supplier.
struct ContractTerms {
  double price = 0.0;
  int due_period = 0;
  std::string material;
  Process process = Process::FDM;
  double resolution = 0.0;
  int supplier_id = 0;
  int order_id = 0;
};

inline void validate(const ContractTerms& t) {
  if (t.price <= 0.0) throw ConfigError("contract price must be positive");
}

struct Contract {
  ContractTerms terms;
  double order_utility = 0.0;     // u_{i,c}
  double supplier_utility = 0.0;  // u_{j,c}
  double production_hours = 0.0;  // p_{ij}, shared by all contracts of the pair

  int order_id() const { return terms.order_id; }
  int supplier_id() const { return terms.supplier_id; }
  double total_utility() const { return order_utility + supplier_utility; }
};

}  // namespace maas
