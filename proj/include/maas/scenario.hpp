#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "maas/core.hpp"
#include "maas/errors.hpp"
#include "maas/matching.hpp"
#include "maas/rng.hpp"
#include "maas/utility.hpp"

namespace maas {

// Scenario configuration, seeded generation of supplier pools and order
// streams, and the JSON fixture format (suppliers / machines / orders arrays,
// snake_case field names).

struct ProcessCatalog {
  std::vector<std::string> materials;
  double resolution_min = 0.0;
  double resolution_max = 0.0;
  double unit_price = 10.0;  // currency per cm^3 baseline
};

inline std::map<Process, ProcessCatalog> default_catalog() {
  return {
      {Process::FDM, {{"PLA", "PC", "ASA", "TPU"}, 100, 300, 6.0}},
      {Process::SLA, {{"resin-standard", "resin-tough", "resin-clear"}, 25, 100, 9.0}},
      {Process::MaterialJetting, {{"mj-rigid", "mj-flex"}, 16, 80, 12.0}},
      {Process::SlsPolymer, {{"nylon-12", "nylon-11", "tpu-sls"}, 60, 120, 10.0}},
      {Process::SlsMetal, {{"aluminum", "steel"}, 20, 60, 22.0}},
  };
}

struct ScenarioConfig {
  std::uint64_t master_seed = 1;
  int periods = 15;

  // suppliers
  int supplier_count = 20;
  std::map<Process, double> machine_mix = {{Process::FDM, 0.50},
                                           {Process::SLA, 0.15},
                                           {Process::MaterialJetting, 0.15},
                                           {Process::SlsPolymer, 0.15},
                                           {Process::SlsMetal, 0.05}};
  double rating_min = 3.0;
  double rating_max = 5.0;
  double material_coverage = 0.55;   // chance a machine stocks each catalog material
  double inventory_coverage = 0.60;  // chance a material is on the shelf for utility

  // capacity process
  double capacity_rate = 3.5;  // committed hours arriving per period
  double capacity_cap = 6.0;   // cap per period
  int commit_periods = 4;

  // order stream
  double order_rate = 20.0;  // Poisson arrivals per period
  std::map<Process, double> process_pmf = {{Process::FDM, 0.50},
                                           {Process::SLA, 0.15},
                                           {Process::MaterialJetting, 0.15},
                                           {Process::SlsPolymer, 0.15},
                                           {Process::SlsMetal, 0.05}};
  std::vector<double> due_pmf = {0.10, 0.15, 0.25, 0.25, 0.25};  // offsets 3..7
  double production_min_hours = 4.2;
  double production_max_hours = 6.5;  // mean 5.35
  double volume_min = 40.0;
  double volume_max = 120.0;
  int client_pool = 60;

  // contracts and matching
  int contracts_per_pair = 2;
  double price_low_factor = 0.95;
  double price_high_factor = 1.05;
  std::size_t enumeration_budget = 1000000;
  double switching_cost = 0.0;

  // normalization ranges for the utility curves
  double distance_lo = 50.0, distance_hi = 800.0;
  double price_lo = 150.0, price_hi = 1600.0;

  // geography
  double lat_lo = 33.0, lat_hi = 42.0;
  double lon_lo = -85.0, lon_hi = -75.0;
};

inline void validate(const ScenarioConfig& c) {
  auto check_pmf = [](const auto& pmf, const std::string& name) {
    double total = 0.0;
    for (const auto& entry : pmf) {
      double p;
      if constexpr (std::is_same_v<std::decay_t<decltype(entry)>, double>)
        p = entry;
      else
        p = entry.second;
      if (p < 0.0) throw ConfigError(name + " has a negative probability");
      total += p;
    }
    if (std::fabs(total - 1.0) > 1e-9) throw ConfigError(name + " must sum to 1");
  };
  check_pmf(c.machine_mix, "machine_mix");
  check_pmf(c.process_pmf, "process_pmf");
  check_pmf(c.due_pmf, "due_pmf");
  if (c.order_rate <= 0.0 || c.capacity_rate <= 0.0)
    throw ConfigError("arrival rates must be positive");
  if (c.periods < 1) throw ConfigError("horizon must be at least one period");
  if (c.supplier_count < 1) throw ConfigError("need at least one supplier");
  if (c.production_min_hours <= 0.0 || c.production_max_hours < c.production_min_hours)
    throw ConfigError("bad production time range");
}

struct ScenarioData {
  std::vector<Supplier> suppliers;
  std::vector<std::vector<Order>> arrivals;  // index 0 -> period 1
};

namespace detail {

inline Process pick_process(const std::map<Process, double>& pmf, Rng& rng) {
  std::vector<Process> keys;
  std::vector<double> weights;
  for (const auto& [p, w] : pmf) {
    keys.push_back(p);
    weights.push_back(w);
  }
  return keys[rng.pick_weighted(weights)];
}

}  // namespace detail

inline Supplier generate_supplier(const ScenarioConfig& cfg, int index) {
  const auto catalog = default_catalog();
  Rng rng = stream(cfg.master_seed, "supplier", {static_cast<std::uint64_t>(index)});
  Supplier s;
  s.id = index + 1;
  s.rating = std::round(rng.uniform(cfg.rating_min, cfg.rating_max) * 10.0) / 10.0;
  s.rating = std::clamp(s.rating, 1.0, 5.0);
  const double roll = rng.next_double();
  s.size_class = roll < 0.5 ? SizeClass::Small : roll < 0.8 ? SizeClass::Medium : SizeClass::Large;
  s.location = {rng.uniform(cfg.lat_lo, cfg.lat_hi), rng.uniform(cfg.lon_lo, cfg.lon_hi)};

  Machine m;
  m.id = s.id * 100;
  m.process = detail::pick_process(cfg.machine_mix, rng);
  const ProcessCatalog& cat = catalog.at(m.process);
  for (const std::string& mat : cat.materials)
    if (rng.bernoulli(cfg.material_coverage)) m.materials.insert(mat);
  if (m.materials.empty())
    m.materials.insert(cat.materials[rng.next_u64() % cat.materials.size()]);
  const double span = cat.resolution_max - cat.resolution_min;
  const double lo = cat.resolution_min + rng.uniform(0.0, 0.3) * span;
  const double hi = cat.resolution_max - rng.uniform(0.0, 0.2) * span;
  m.resolution_range = {std::min(lo, hi), std::max(lo, hi)};
  const double base = cat.unit_price * rng.uniform(0.75, 0.95);
  m.unit_threshold_band = {base, base * rng.uniform(1.35, 1.70)};
  m.min_order_price = 5.0;
  // per-day availability for the auction mechanism: 7 days, 2 shifts a day
  m.capacity_by_period.resize(14);
  for (double& c : m.capacity_by_period) c = rng.uniform(0.0, 8.0);

  for (const std::string& mat : cat.materials)
    if (rng.bernoulli(cfg.inventory_coverage)) s.materials_in_stock.insert(mat);

  s.machines.push_back(std::move(m));
  validate(s);
  return s;
}

inline Order generate_order(const ScenarioConfig& cfg, int id, int period) {
  const auto catalog = default_catalog();
  Rng rng = stream(cfg.master_seed, "order", {static_cast<std::uint64_t>(id)});
  Order o;
  o.id = id;
  o.process = detail::pick_process(cfg.process_pmf, rng);
  const ProcessCatalog& cat = catalog.at(o.process);
  o.material = cat.materials[rng.next_u64() % cat.materials.size()];
  o.resolution = rng.uniform(cat.resolution_min, cat.resolution_max);
  o.part_volume = rng.uniform(cfg.volume_min, cfg.volume_max);
  const double hours = rng.uniform(cfg.production_min_hours, cfg.production_max_hours);
  for (const auto& [proc, unused] : catalog) o.production_time_by_process[proc] = hours;
  o.arrival_period = period;
  o.due_period = period + 3 + static_cast<int>(rng.pick_weighted(cfg.due_pmf));
  const double roll = rng.next_double();
  o.size_preference =
      roll < 0.4 ? SizeClass::Small : roll < 0.7 ? SizeClass::Medium : SizeClass::Large;
  o.location = {rng.uniform(cfg.lat_lo, cfg.lat_hi), rng.uniform(cfg.lon_lo, cfg.lon_hi)};
  o.client_id = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(cfg.client_pool));
  validate(o);
  return o;
}

// Poisson arrival counts per period with globally unique order ids.
inline ScenarioData generate_scenario(const ScenarioConfig& cfg) {
  validate(cfg);
  ScenarioData data;
  data.suppliers.reserve(static_cast<std::size_t>(cfg.supplier_count));
  for (int i = 0; i < cfg.supplier_count; ++i)
    data.suppliers.push_back(generate_supplier(cfg, i));
  int next_id = 1;
  data.arrivals.resize(static_cast<std::size_t>(cfg.periods));
  for (int t = 1; t <= cfg.periods; ++t) {
    Rng rng = stream(cfg.master_seed, "arrivals", {static_cast<std::uint64_t>(t)});
    const int count = rng.poisson(cfg.order_rate);
    for (int k = 0; k < count; ++k)
      data.arrivals[static_cast<std::size_t>(t - 1)].push_back(
          generate_order(cfg, next_id++, t));
  }
  return data;
}

// committed hours arriving for one absolute period; stable per (supplier, period)
inline double capacity_arrival(const ScenarioConfig& cfg, int supplier_id, int period) {
  Rng rng = stream(cfg.master_seed, "capacity",
                   {static_cast<std::uint64_t>(supplier_id), static_cast<std::uint64_t>(period)});
  return std::min(cfg.capacity_cap, static_cast<double>(rng.poisson(cfg.capacity_rate)));
}

// -- utility quantification -----------------------------------------------

inline UtilityProfile order_profile(const ScenarioConfig& cfg, SizeClass preference) {
  std::map<std::string, double> size_values;
  switch (preference) {
    case SizeClass::Large:
      size_values = {{"large", 1.0}, {"medium", 0.6}, {"small", 0.3}};
      break;
    case SizeClass::Medium:
      size_values = {{"medium", 1.0}, {"large", 0.6}, {"small", 0.4}};
      break;
    case SizeClass::Small:
      size_values = {{"small", 1.0}, {"medium", 0.6}, {"large", 0.3}};
      break;
  }
  UtilityProfile p;
  p.terms.push_back({0.2,
                     quadratic_curve(0.595, -1.516, 0.925, cfg.distance_lo, cfg.distance_hi),
                     Attribute::Distance});
  p.terms.push_back({0.1, categorical_curve(std::move(size_values)), Attribute::SupplierSize});
  p.terms.push_back({0.3, quadratic_curve(-0.219, 1.225, -0.005, 1, 5), Attribute::SupplierRating});
  p.terms.push_back(
      {0.4, quadratic_curve(0.922, -1.962, 1.033, cfg.price_lo, cfg.price_hi), Attribute::Price});
  return p;
}

inline UtilityProfile supplier_profile(const ScenarioConfig& cfg) {
  UtilityProfile p;
  p.terms.push_back({0.2,
                     categorical_curve({{"in_stock", 1.0}, {"not_in_stock", 0.3}}),
                     Attribute::Material});
  p.terms.push_back({0.3, quadratic_curve(-0.240, 1.329, -0.048, 1, 8), Attribute::Urgency});
  p.terms.push_back(
      {0.5, quadratic_curve(-0.444, 1.401, 0.032, cfg.price_lo, cfg.price_hi), Attribute::Revenue});
  return p;
}

// (order utility, supplier utility) for given contract terms; urgency counts
// periods remaining at quantification time
inline std::pair<double, double> quantify_pair(const ScenarioConfig& cfg, const Order& o,
                                               const Supplier& s, const ContractTerms& terms,
                                               int current_period) {
  AttributeContext oc;
  oc.set(Attribute::Distance, haversine_miles(o.location, s.location))
      .set(Attribute::SupplierSize, to_string(s.size_class))
      .set(Attribute::SupplierRating, s.rating)
      .set(Attribute::Price, terms.price);
  const double ui = contract_utility(order_profile(cfg, o.size_preference), oc);

  AttributeContext sc;
  sc.set(Attribute::Material,
         s.materials_in_stock.count(o.material) ? "in_stock" : "not_in_stock")
      .set(Attribute::Urgency,
           std::clamp(static_cast<double>(o.due_period - current_period), 1.0, 8.0))
      .set(Attribute::Revenue, terms.price);
  const double uj = contract_utility(supplier_profile(cfg), sc);
  return {ui, uj};
}

// contract price points for a pair: the supplier's own unit pricing with a
// low and a high quote
inline std::vector<double> price_points(const ScenarioConfig& cfg, const Order& o,
                                        const Supplier& s) {
  const auto& band = s.machines.front().unit_threshold_band;
  const double unit = 0.5 * (band.low + band.high);
  const double base = unit * o.part_volume;
  if (cfg.contracts_per_pair <= 1) return {base};
  return {base * cfg.price_low_factor, base * cfg.price_high_factor};
}

// -- JSON ------------------------------------------------------------------

inline nlohmann::json to_json(const Machine& m) {
  return {{"id", m.id},
          {"process", to_string(m.process)},
          {"materials", std::vector<std::string>(m.materials.begin(), m.materials.end())},
          {"resolution_range", {m.resolution_range.min_microns, m.resolution_range.max_microns}},
          {"capacity_by_period", m.capacity_by_period},
          {"unit_threshold_band", {m.unit_threshold_band.low, m.unit_threshold_band.high}},
          {"min_order_price", m.min_order_price}};
}

inline nlohmann::json to_json(const Supplier& s) {
  nlohmann::json machines = nlohmann::json::array();
  for (const Machine& m : s.machines) machines.push_back(to_json(m));
  return {{"id", s.id},
          {"rating", s.rating},
          {"machines", machines},
          {"size_class", to_string(s.size_class)},
          {"location", {s.location.lat, s.location.lon}},
          {"success_counters",
           {{"first_round_selections", s.success_counters.first_round_selections},
            {"first_round_wins", s.success_counters.first_round_wins}}},
          {"materials_in_stock",
           std::vector<std::string>(s.materials_in_stock.begin(), s.materials_in_stock.end())}};
}

inline nlohmann::json to_json(const Order& o) {
  nlohmann::json times = nlohmann::json::object();
  for (const auto& [p, t] : o.production_time_by_process) times[to_string(p)] = t;
  return {{"id", o.id},
          {"part_volume", o.part_volume},
          {"production_time_by_process", times},
          {"material", o.material},
          {"process", to_string(o.process)},
          {"resolution", o.resolution},
          {"arrival_period", o.arrival_period},
          {"due_period", o.due_period},
          {"size_preference", to_string(o.size_preference)},
          {"location", {o.location.lat, o.location.lon}},
          {"client_id", o.client_id}};
}

inline Machine machine_from_json(const nlohmann::json& j) {
  Machine m;
  m.id = j.at("id").get<int>();
  m.process = process_from_string(j.at("process").get<std::string>());
  for (const auto& mat : j.at("materials")) m.materials.insert(mat.get<std::string>());
  m.resolution_range = {j.at("resolution_range")[0].get<double>(),
                        j.at("resolution_range")[1].get<double>()};
  m.capacity_by_period = j.at("capacity_by_period").get<std::vector<double>>();
  m.unit_threshold_band = {j.at("unit_threshold_band")[0].get<double>(),
                           j.at("unit_threshold_band")[1].get<double>()};
  m.min_order_price = j.value("min_order_price", 0.0);
  return m;
}

inline Supplier supplier_from_json(const nlohmann::json& j) {
  Supplier s;
  s.id = j.at("id").get<int>();
  s.rating = j.at("rating").get<double>();
  for (const auto& m : j.at("machines")) s.machines.push_back(machine_from_json(m));
  s.size_class = size_class_from_string(j.value("size_class", "medium"));
  if (j.contains("location"))
    s.location = {j["location"][0].get<double>(), j["location"][1].get<double>()};
  if (j.contains("success_counters")) {
    s.success_counters.first_round_selections =
        j["success_counters"].value("first_round_selections", 0L);
    s.success_counters.first_round_wins = j["success_counters"].value("first_round_wins", 0L);
  }
  if (j.contains("materials_in_stock"))
    for (const auto& mat : j["materials_in_stock"])
      s.materials_in_stock.insert(mat.get<std::string>());
  validate(s);
  return s;
}

inline Order order_from_json(const nlohmann::json& j) {
  Order o;
  o.id = j.at("id").get<int>();
  o.part_volume = j.at("part_volume").get<double>();
  for (const auto& [name, t] : j.at("production_time_by_process").items())
    o.production_time_by_process[process_from_string(name)] = t.get<double>();
  o.material = j.at("material").get<std::string>();
  o.process = process_from_string(j.at("process").get<std::string>());
  o.resolution = j.at("resolution").get<double>();
  o.arrival_period = j.at("arrival_period").get<int>();
  o.due_period = j.at("due_period").get<int>();
  o.size_preference = size_class_from_string(j.value("size_preference", "medium"));
  if (j.contains("location"))
    o.location = {j["location"][0].get<double>(), j["location"][1].get<double>()};
  o.client_id = j.value("client_id", 0);
  validate(o);
  return o;
}

inline nlohmann::json fixture_to_json(const ScenarioData& data) {
  nlohmann::json suppliers = nlohmann::json::array();
  for (const Supplier& s : data.suppliers) suppliers.push_back(to_json(s));
  nlohmann::json orders = nlohmann::json::array();
  for (const auto& period : data.arrivals)
    for (const Order& o : period) orders.push_back(to_json(o));
  return {{"suppliers", suppliers}, {"orders", orders}};
}

inline ScenarioData fixture_from_json(const nlohmann::json& j, int periods) {
  ScenarioData data;
  for (const auto& s : j.at("suppliers")) data.suppliers.push_back(supplier_from_json(s));
  data.arrivals.resize(static_cast<std::size_t>(periods));
  for (const auto& oj : j.at("orders")) {
    Order o = order_from_json(oj);
    if (o.arrival_period < 1 || o.arrival_period > periods)
      throw ConfigError("order arrival outside the scenario horizon");
    data.arrivals[static_cast<std::size_t>(o.arrival_period - 1)].push_back(std::move(o));
  }
  return data;
}

// -- config JSON -------------------------------------------------------------

inline ScenarioConfig config_from_json(const nlohmann::json& j) {
  ScenarioConfig c;
  c.master_seed = j.value("seed", c.master_seed);
  c.periods = j.value("periods", c.periods);
  c.supplier_count = j.value("suppliers", c.supplier_count);
  c.order_rate = j.value("order_rate", c.order_rate);
  c.capacity_rate = j.value("capacity_rate", c.capacity_rate);
  c.capacity_cap = j.value("capacity_cap", c.capacity_cap);
  c.commit_periods = j.value("commit_periods", c.commit_periods);
  c.rating_min = j.value("rating_min", c.rating_min);
  c.rating_max = j.value("rating_max", c.rating_max);
  c.material_coverage = j.value("material_coverage", c.material_coverage);
  c.inventory_coverage = j.value("inventory_coverage", c.inventory_coverage);
  c.production_min_hours = j.value("production_min_hours", c.production_min_hours);
  c.production_max_hours = j.value("production_max_hours", c.production_max_hours);
  c.volume_min = j.value("volume_min", c.volume_min);
  c.volume_max = j.value("volume_max", c.volume_max);
  c.client_pool = j.value("client_pool", c.client_pool);
  c.contracts_per_pair = j.value("contracts_per_pair", c.contracts_per_pair);
  c.enumeration_budget = j.value("enumeration_budget", c.enumeration_budget);
  c.switching_cost = j.value("switching_cost", c.switching_cost);
  if (j.contains("due_pmf")) c.due_pmf = j["due_pmf"].get<std::vector<double>>();
  if (j.contains("machine_mix")) {
    c.machine_mix.clear();
    for (const auto& [name, p] : j["machine_mix"].items())
      c.machine_mix[process_from_string(name)] = p.get<double>();
  }
  if (j.contains("process_pmf")) {
    c.process_pmf.clear();
    for (const auto& [name, p] : j["process_pmf"].items())
      c.process_pmf[process_from_string(name)] = p.get<double>();
  }
  validate(c);
  return c;
}

}  // namespace maas
