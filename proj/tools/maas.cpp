// Command-line front end: auction campaigns, matching runs, stability audits,
// DQN training/evaluation, the full simulation loop and the defection
// experiment. Outputs are CSV metrics plus JSON documents; a fixed seed in
// single-threaded mode reproduces outputs byte for byte.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "maas/acceptance.hpp"
#include "maas/harness.hpp"

using namespace maas;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "maas-0.1.0";

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

struct Inputs {
  nlohmann::json config = nlohmann::json::object();
  std::string config_hash = "default";
  std::uint64_t seed = 1;
  fs::path out;
};

nlohmann::json load_config(const std::string& path, std::string& hash) {
  if (path.empty()) return nlohmann::json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  std::uint64_t h = hash_tag(text);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  hash = buf;
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

ScenarioConfig scenario_from(const Inputs& in) {
  ScenarioConfig cfg = config_from_json(in.config);
  cfg.master_seed = in.seed;
  return cfg;
}

AcceptanceConfig acceptance_from(const nlohmann::json& root) {
  AcceptanceConfig cfg;
  if (!root.contains("acceptance")) return cfg;
  const auto& j = root["acceptance"];
  cfg.slots = j.value("slots", cfg.slots);
  cfg.arrivals_per_period = j.value("arrivals_per_period", cfg.arrivals_per_period);
  cfg.horizon = j.value("horizon", cfg.horizon);
  cfg.commit_periods = j.value("commit_periods", cfg.commit_periods);
  cfg.capacity_rate = j.value("capacity_rate", cfg.capacity_rate);
  cfg.capacity_cap = j.value("capacity_cap", cfg.capacity_cap);
  cfg.invalid_penalty = j.value("invalid_penalty", cfg.invalid_penalty);
  cfg.waste_coefficient = j.value("waste_coefficient", cfg.waste_coefficient);
  cfg.price_k = j.value("price_k", cfg.price_k);
  cfg.price_l = j.value("price_l", cfg.price_l);
  cfg.unit_price = j.value("unit_price", cfg.unit_price);
  cfg.gamma = j.value("gamma", cfg.gamma);
  if (j.contains("due_pmf")) cfg.due_pmf = j["due_pmf"].get<std::vector<double>>();
  double total = 0.0;
  for (double p : cfg.due_pmf) total += p;
  if (std::fabs(total - 1.0) > 1e-9) throw ConfigError("acceptance due_pmf must sum to 1");
  return cfg;
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(dir / name);
  if (!out) throw ConfigError("cannot write output file: " + (dir / name).string());
  return out;
}

void write_json(const fs::path& dir, const std::string& name, const nlohmann::json& j) {
  std::ofstream out = open_out(dir, name);
  out << j.dump(2) << "\n";
}

nlohmann::json provenance(const Inputs& in) {
  return {{"seed", in.seed}, {"config_hash", in.config_hash}, {"version", kVersion}};
}

std::vector<int> parse_widths(const std::string& spec) {
  std::vector<int> widths;
  std::stringstream ss(spec);
  std::string token;
  while (std::getline(ss, token, ','))
    if (!token.empty()) widths.push_back(std::stoi(token));
  if (widths.empty()) throw ConfigError("empty layer specification");
  return widths;
}

// -- subcommands -----------------------------------------------------------

int cmd_auction(const Inputs& in, int attempts, double greediness, bool min_price,
                const std::string& modulate) {
  CampaignConfig cc;
  cc.scenario = scenario_from(in);
  cc.attempts = attempts;
  cc.greediness = greediness;
  cc.min_price_allocator = min_price;
  cc.modulation.rating_min = cc.scenario.rating_min;
  cc.modulation.rating_max = cc.scenario.rating_max;
  for (char c : modulate) {
    if (c == 'r') cc.modulation.active.push_back(Modulation::Rating);
    if (c == 'a') cc.modulation.active.push_back(Modulation::Availability);
    if (c == 'u') cc.modulation.active.push_back(Modulation::Urgency);
  }
  const CampaignResult r = run_auction_campaign(cc, in.seed, {});

  std::ofstream csv = open_out(in.out, "auction_attempts.csv");
  csv << "attempt_id,order_id,bid,rounds,winner_supplier,threshold_price,delight_pct\n";
  for (const AttemptRow& row : r.rows) {
    csv << row.attempt << ',' << row.order_id << ',' << fmt(row.bid) << ',' << row.rounds
        << ',' << (row.won ? std::to_string(row.winner_supplier) : std::string()) << ','
        << fmt(row.threshold_price) << ',' << fmt(row.delight_pct) << "\n";
  }

  nlohmann::json wins = nlohmann::json::object();
  for (const auto& [sid, count] : r.wins_by_supplier) wins[std::to_string(sid)] = count;
  write_json(in.out, "auction_summary.json",
             {{"provenance", provenance(in)},
              {"attempts", cc.attempts},
              {"successful", r.successful},
              {"successful_rate", static_cast<double>(r.successful) / cc.attempts},
              {"mean_delight_pct", r.mean_delight},
              {"fair_game_attempts", r.fair_game_attempts},
              {"wins_by_supplier", wins}});
  return 0;
}

void write_metric_header(std::ofstream& csv) {
  csv << "instance,period,arrivals,pool,matched,graph_edges,combined_edges,"
         "solver_utility,mw_utility,impact_of_stability,avg_order_utility,"
         "avg_supplier_utility,matched_orders,matched_suppliers,avg_order_rank,"
         "avg_supplier_rank,blocking_lb,"
         "bp_count,bp_orders_in,bp_suppliers_in,bp_per_order,bp_per_supplier,"
         "bp_unmatched_orders,bp_underutilized_suppliers,bp_available,"
         "bp_avg_order_gain,bp_avg_supplier_gain,"
         "bg_count,bg_orders_in,bg_suppliers_in,bg_per_order,bg_per_supplier,"
         "bg_unmatched_orders,bg_underutilized_suppliers,bg_available,"
         "bg_avg_order_gain,bg_avg_supplier_gain,bg_avg_size,"
         "post_bp_count,post_bp_per_order,post_bp_per_supplier,"
         "post_bg_count,post_bg_per_order,post_bg_per_supplier\n";
}

void write_metric_row(std::ofstream& csv, std::size_t instance, const PeriodMetrics& row) {
  const auto& bp = row.pairs_transient;
  const auto& bg = row.groups_transient;
  const auto& pp = row.pairs_posterior;
  const auto& pg = row.groups_posterior;
  csv << instance << ',' << row.period << ',' << row.arrivals << ',' << row.pool_size << ','
      << row.matched << ',' << row.graph_edges << ',' << row.combined_edges << ','
      << fmt(row.solver_utility) << ',' << fmt(row.mw_utility) << ','
      << fmt(row.system.impact_of_stability) << ',' << fmt(row.system.avg_order_utility) << ','
      << fmt(row.system.avg_supplier_utility) << ',' << fmt(row.system.matched_orders) << ','
      << fmt(row.system.matched_suppliers) << ',' << fmt(row.system.avg_order_rank) << ','
      << fmt(row.system.avg_supplier_rank) << ',' << row.blocking_lb << ','
      << fmt(bp.count) << ',' << fmt(bp.orders_in) << ',' << fmt(bp.suppliers_in) << ','
      << fmt(bp.per_order) << ',' << fmt(bp.per_supplier) << ',' << fmt(bp.unmatched_orders_in)
      << ',' << fmt(bp.underutilized_suppliers_in) << ',' << fmt(bp.available_fraction) << ','
      << fmt(bp.avg_order_gain) << ',' << fmt(bp.avg_supplier_gain) << ',' << fmt(bg.count)
      << ',' << fmt(bg.orders_in) << ',' << fmt(bg.suppliers_in) << ',' << fmt(bg.per_order)
      << ',' << fmt(bg.per_supplier) << ',' << fmt(bg.unmatched_orders_in) << ','
      << fmt(bg.underutilized_suppliers_in) << ',' << fmt(bg.available_fraction) << ','
      << fmt(bg.avg_order_gain) << ',' << fmt(bg.avg_supplier_gain) << ',' << fmt(bg.avg_size)
      << ',' << fmt(pp.count) << ',' << fmt(pp.per_order) << ',' << fmt(pp.per_supplier) << ','
      << fmt(pg.count) << ',' << fmt(pg.per_order) << ',' << fmt(pg.per_supplier) << "\n";
}

int cmd_match(const Inputs& in, const std::string& solver, const std::string& flavor,
              int instances) {
  const ScenarioConfig cfg = scenario_from(in);
  const SolverKind kind = solver_from_string(solver);
  const MwasFlavor fl = flavor_from_string(flavor);

  const ScenarioData* fixture = nullptr;
  ScenarioData fixture_data;
  if (in.config.contains("suppliers") && in.config["suppliers"].is_array()) {
    fixture_data = fixture_from_json(in.config, cfg.periods);
    fixture = &fixture_data;
  }

  const std::vector<InstanceResult> results =
      run_periodic_matching(cfg, kind, fl, instances, fixture);

  std::ofstream csv = open_out(in.out, "metrics.csv");
  write_metric_header(csv);
  for (std::size_t i = 0; i < results.size(); ++i)
    for (const PeriodMetrics& row : results[i].rows) write_metric_row(csv, i, row);

  nlohmann::json instances_json = nlohmann::json::array();
  for (const InstanceResult& r : results) {
    nlohmann::json periods = nlohmann::json::array();
    for (const PeriodMetrics& row : r.rows)
      periods.push_back({{"period", row.period},
                         {"matched", row.matched},
                         {"utility", row.solver_utility}});
    instances_json.push_back({{"seed", r.seed}, {"periods", periods}});
  }
  write_json(in.out, "matching.json",
             {{"provenance", provenance(in)},
              {"solver", solver},
              {"flavor", flavor},
              {"instances", instances_json}});
  return 0;
}

int cmd_audit(const Inputs& in, const std::string& solver, const std::string& mode,
              double switching_cost, int instances) {
  ScenarioConfig cfg = scenario_from(in);
  cfg.switching_cost = switching_cost;
  const SolverKind kind = solver_from_string(solver);
  const std::vector<InstanceResult> results =
      run_periodic_matching(cfg, kind, MwasFlavor::MaxWeight, instances);

  const bool posterior = mode == "posterior";
  if (!posterior && mode != "transient") throw ConfigError("unknown audit mode: " + mode);

  std::ofstream csv = open_out(in.out, "audit.csv");
  csv << "instance,period,mode,switching_cost,"
         "orders_in_bp,suppliers_in_bp,avg_bp_per_order,avg_bp_per_supplier,"
         "unmatched_orders_in_bp,underutilized_suppliers_in_bp,available_bp,"
         "avg_order_gain_bp,avg_supplier_gain_bp,"
         "orders_in_bg,suppliers_in_bg,avg_bg_per_order,avg_bg_per_supplier,"
         "unmatched_orders_in_bg,underutilized_suppliers_in_bg,available_bg,"
         "avg_order_gain_bg,avg_supplier_gain_bg,avg_size_bg\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    for (const PeriodMetrics& row : results[i].rows) {
      const BlockingMetrics& bp = posterior ? row.pairs_posterior : row.pairs_transient;
      const BlockingMetrics& bg = posterior ? row.groups_posterior : row.groups_transient;
      csv << i << ',' << row.period << ',' << mode << ',' << fmt(switching_cost) << ','
          << fmt(bp.orders_in) << ',' << fmt(bp.suppliers_in) << ',' << fmt(bp.per_order)
          << ',' << fmt(bp.per_supplier) << ',' << fmt(bp.unmatched_orders_in) << ','
          << fmt(bp.underutilized_suppliers_in) << ',' << fmt(bp.available_fraction) << ','
          << fmt(bp.avg_order_gain) << ',' << fmt(bp.avg_supplier_gain) << ','
          << fmt(bg.orders_in) << ',' << fmt(bg.suppliers_in) << ',' << fmt(bg.per_order)
          << ',' << fmt(bg.per_supplier) << ',' << fmt(bg.unmatched_orders_in) << ','
          << fmt(bg.underutilized_suppliers_in) << ',' << fmt(bg.available_fraction) << ','
          << fmt(bg.avg_order_gain) << ',' << fmt(bg.avg_supplier_gain) << ','
          << fmt(bg.avg_size) << "\n";
    }
  }
  return 0;
}

int cmd_simulate(const Inputs& in, const std::string& solver, const std::string& flavor,
                 int instances) {
  const ScenarioConfig cfg = scenario_from(in);
  const SolverKind kind = solver_from_string(solver);
  const std::vector<InstanceResult> results =
      run_periodic_matching(cfg, kind, flavor_from_string(flavor), instances);

  std::ofstream csv = open_out(in.out, "simulate_periods.csv");
  write_metric_header(csv);
  for (std::size_t i = 0; i < results.size(); ++i)
    for (const PeriodMetrics& row : results[i].rows) write_metric_row(csv, i, row);

  // aggregate over instances: mean of per-instance period means, 95% CI
  auto collect = [&](auto&& extract) {
    std::vector<double> means;
    for (const InstanceResult& r : results) {
      double total = 0.0;
      for (const PeriodMetrics& row : r.rows) total += extract(row);
      means.push_back(r.rows.empty() ? 0.0 : total / r.rows.size());
    }
    return aggregate(means);
  };
  std::ofstream summary = open_out(in.out, "simulate_summary.csv");
  summary << "metric,mean,ci95\n";
  const std::vector<std::pair<std::string, std::function<double(const PeriodMetrics&)>>> rows = {
      {"impact_of_stability",
       [](const PeriodMetrics& r) { return r.system.impact_of_stability; }},
      {"avg_order_utility", [](const PeriodMetrics& r) { return r.system.avg_order_utility; }},
      {"avg_supplier_utility",
       [](const PeriodMetrics& r) { return r.system.avg_supplier_utility; }},
      {"matched_orders", [](const PeriodMetrics& r) { return r.system.matched_orders; }},
      {"matched_suppliers", [](const PeriodMetrics& r) { return r.system.matched_suppliers; }},
      {"avg_order_rank", [](const PeriodMetrics& r) { return r.system.avg_order_rank; }},
      {"avg_supplier_rank", [](const PeriodMetrics& r) { return r.system.avg_supplier_rank; }},
      {"bp_count", [](const PeriodMetrics& r) { return r.pairs_transient.count; }},
      {"bg_count", [](const PeriodMetrics& r) { return r.groups_transient.count; }},
      {"post_bp_count", [](const PeriodMetrics& r) { return r.pairs_posterior.count; }},
      {"post_bg_count", [](const PeriodMetrics& r) { return r.groups_posterior.count; }},
  };
  for (const auto& [name, extract] : rows) {
    const Aggregate a = collect(extract);
    summary << name << ',' << fmt(a.mean) << ',' << fmt(a.ci) << "\n";
  }
  write_json(in.out, "simulate_summary.json",
             {{"provenance", provenance(in)},
              {"solver", solver},
              {"instances", instances},
              {"periods", cfg.periods}});
  return 0;
}

int cmd_train(const Inputs& in, int episodes, const std::string& net, std::size_t batch,
              std::size_t buffer, int copy_every, double lr) {
  const AcceptanceConfig cfg = acceptance_from(in.config);
  DqnHyperparams hp;
  hp.episodes = episodes;
  hp.hidden = parse_widths(net);
  hp.batch_size = batch;
  hp.replay_capacity = buffer;
  hp.target_copy_every = copy_every;
  hp.lr = lr;

  const TrainResult result = train_dqn(cfg, hp, in.seed);

  std::ofstream csv = open_out(in.out, "learning_curve.csv");
  csv << "episode,epsilon,normalized_revenue,acceptance_rate\n";
  for (const LearningRow& row : result.curve)
    csv << row.episode << ',' << fmt(row.epsilon) << ',' << fmt(row.normalized_revenue) << ','
        << fmt(row.acceptance_rate) << "\n";

  const fs::path ckpt = in.out / "checkpoint.bin";
  fs::create_directories(in.out);
  save_checkpoint(result.net, ckpt.string());

  write_json(in.out, "train_manifest.json",
             {{"provenance", provenance(in)},
              {"episodes", episodes},
              {"hidden", hp.hidden},
              {"batch_size", hp.batch_size},
              {"replay_capacity", hp.replay_capacity},
              {"target_copy_every", hp.target_copy_every},
              {"learning_rate", hp.lr},
              {"random_policy_mean_revenue", result.random_mean},
              {"checkpoint", "checkpoint.bin"}});
  return 0;
}

int cmd_evaluate(const Inputs& in, const std::string& checkpoint, int episodes,
                 int tq_episodes) {
  const AcceptanceConfig cfg = acceptance_from(in.config);
  const Mlp net = load_checkpoint(checkpoint);
  if (net.input_size() != cfg.state_size() || net.output_size() != cfg.action_count())
    throw ConfigError("checkpoint does not match the configured environment");

  DqnHyperparams schedule;
  schedule.episodes = tq_episodes;
  TabularQ tq(cfg.action_count(), 0.1, cfg.gamma);
  tq.train(cfg, stream_seed(in.seed, "tq-train"), tq_episodes, schedule);

  std::ofstream csv = open_out(in.out, "evaluate.csv");
  csv << "policy,mean_revenue,normalized_revenue,ci95_normalized,acceptance_rate\n";

  const int n = episodes;
  std::vector<double> random_revenues;
  double random_acc = 0.0;
  for (int e = 0; e < n; ++e) {
    const EpisodeStats s = run_episode(
        AcceptanceEnv(cfg, stream_seed(in.seed, "eval-env", {static_cast<std::uint64_t>(e)})),
        random_policy(stream_seed(in.seed, "eval-random", {static_cast<std::uint64_t>(e)})));
    random_revenues.push_back(s.revenue);
    random_acc += s.acceptance_rate();
  }
  const Aggregate random_agg = aggregate(random_revenues);
  const double scale = random_agg.mean > 0.0 ? 100.0 / random_agg.mean : 1.0;

  auto emit = [&](const std::string& name, const std::vector<double>& revenues, double acc) {
    const Aggregate a = aggregate(revenues);
    std::vector<double> normalized;
    for (double r : revenues) normalized.push_back(r * scale);
    const Aggregate an = aggregate(normalized);
    csv << name << ',' << fmt(a.mean) << ',' << fmt(an.mean) << ',' << fmt(an.ci) << ','
        << fmt(acc / n) << "\n";
  };

  auto run_policy = [&](const std::string& name, const Policy& policy) {
    std::vector<double> revenues;
    double acc = 0.0;
    for (int e = 0; e < n; ++e) {
      const EpisodeStats s = run_episode(
          AcceptanceEnv(cfg,
                        stream_seed(in.seed, "eval-env", {static_cast<std::uint64_t>(e)})),
          policy);
      revenues.push_back(s.revenue);
      acc += s.acceptance_rate();
    }
    emit(name, revenues, acc);
  };

  run_policy("dqn", greedy_q_policy(net));
  run_policy("tabular_q",
             [&tq](const AcceptanceEnv& e) { return const_cast<TabularQ&>(tq).best_action(e); });
  run_policy("rolling_horizon", rolling_horizon_policy());
  run_policy("greedy", [](const AcceptanceEnv& e) { return greedy_action(e); });
  emit("random", random_revenues, random_acc);
  return 0;
}

int cmd_defect(const Inputs& in, const std::string& access, int periods) {
  const ScenarioConfig cfg = scenario_from(in);
  AccessMode mode;
  if (access == "complete")
    mode = AccessMode::Complete;
  else if (access == "restricted")
    mode = AccessMode::Restricted;
  else
    throw ConfigError("unknown access mode: " + access);

  const DefectionResult r = run_defection(cfg, mode, in.seed, periods);
  std::ofstream csv = open_out(in.out, "defection.csv");
  csv << "period,participants,defectors,defector_fraction,realized_utility,mw_utility,"
         "utility_ratio\n";
  for (const DefectionRow& row : r.rows) {
    const double frac =
        row.participants ? static_cast<double>(row.defectors) / row.participants : 0.0;
    const double ratio = row.mw_utility > 0.0 ? row.realized_utility / row.mw_utility : 1.0;
    csv << row.period << ',' << row.participants << ',' << row.defectors << ',' << fmt(frac)
        << ',' << fmt(row.realized_utility) << ',' << fmt(row.mw_utility) << ',' << fmt(ratio)
        << "\n";
  }
  write_json(in.out, "defection_summary.json",
             {{"provenance", provenance(in)},
              {"access", access},
              {"periods", periods},
              {"realized_total", r.realized_total},
              {"mw_total", r.mw_total},
              {"realized_over_mw", r.mw_total > 0.0 ? r.realized_total / r.mw_total : 1.0}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mechanism library and seeded simulation harness for two-sided "
               "manufacturing-as-a-service marketplaces"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  app.add_option("--config", config_path, "scenario configuration JSON");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--out", out_dir, "output directory");

  auto* auction = app.add_subcommand("auction", "run a reverse-auction campaign");
  int attempts = 2000;
  double greediness = 0.5;
  bool min_price = false;
  std::string modulate;
  auction->add_option("--attempts", attempts, "bid attempts to stream");
  auction->add_option("--greediness", greediness, "greediness index in [0,1]");
  auction->add_flag("--min-price", min_price, "use the directly-competitive benchmark");
  auction->add_option("--modulate", modulate, "threshold modulation: any of r, a, u");

  auto* match = app.add_subcommand("match", "solve the periodic matching");
  std::string solver = "as";
  std::string flavor = "max";
  int instances = 1;
  match->add_option("--solver", solver, "mw | mwas | as");
  match->add_option("--flavor", flavor, "max | min | card (mwas stage 2)");
  match->add_option("--instances", instances, "seeded instances");

  auto* audit = app.add_subcommand("audit", "blocking pair/group audit");
  std::string audit_solver = "mw";
  std::string mode = "transient";
  double switching_cost = 0.0;
  int audit_instances = 1;
  audit->add_option("--solver", audit_solver, "mw | mwas | as");
  audit->add_option("--mode", mode, "transient | posterior");
  audit->add_option("--switching-cost", switching_cost, "multiplicative switching cost");
  audit->add_option("--instances", audit_instances, "seeded instances");

  auto* simulate = app.add_subcommand("simulate", "full matching simulation with reports");
  std::string sim_solver = "as";
  std::string sim_flavor = "max";
  int sim_instances = 5;
  simulate->add_option("--solver", sim_solver, "mw | mwas | as");
  simulate->add_option("--flavor", sim_flavor, "max | min | card");
  simulate->add_option("--instances", sim_instances, "seeded instances");

  auto* train = app.add_subcommand("train", "train the order-acceptance DQN");
  int episodes = 4000;
  std::string net = "128,64,32";
  std::size_t batch = 500;
  std::size_t buffer = 20000;
  int copy_every = 10;
  double lr = 1e-4;
  train->add_option("--episodes", episodes, "training episodes");
  train->add_option("--net", net, "hidden layer widths, comma separated");
  train->add_option("--batch", batch, "minibatch size");
  train->add_option("--buffer", buffer, "replay memory capacity");
  train->add_option("--copy-every", copy_every, "episodes between target copies");
  train->add_option("--lr", lr, "learning rate");

  auto* evaluate = app.add_subcommand("evaluate", "replay a checkpoint against baselines");
  std::string checkpoint;
  int eval_episodes = 100;
  int tq_episodes = 2000;
  evaluate->add_option("--checkpoint", checkpoint, "trained network checkpoint")->required();
  evaluate->add_option("--episodes", eval_episodes, "held-out evaluation episodes");
  evaluate->add_option("--tq-episodes", tq_episodes, "tabular-Q training episodes");

  auto* defect = app.add_subcommand("defect", "defection under the socially optimal matching");
  std::string access = "complete";
  int periods = 100;
  defect->add_option("--access", access, "complete | restricted");
  defect->add_option("--periods", periods, "simulation periods");

  CLI11_PARSE(app, argc, argv);

  try {
    Inputs in;
    in.config = load_config(config_path, in.config_hash);
    in.seed = seed;
    in.out = out_dir;
    if (auction->parsed())
      return cmd_auction(in, attempts, greediness, min_price, modulate);
    if (match->parsed()) return cmd_match(in, solver, flavor, instances);
    if (audit->parsed())
      return cmd_audit(in, audit_solver, mode, switching_cost, audit_instances);
    if (simulate->parsed()) return cmd_simulate(in, sim_solver, sim_flavor, sim_instances);
    if (train->parsed()) return cmd_train(in, episodes, net, batch, buffer, copy_every, lr);
    if (evaluate->parsed()) return cmd_evaluate(in, checkpoint, eval_episodes, tq_episodes);
    if (defect->parsed()) return cmd_defect(in, access, periods);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const BudgetError& e) {
    std::cerr << "budget error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
