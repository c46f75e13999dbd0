#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "maas/errors.hpp"
#include "maas/neural.hpp"
#include "maas/rng.hpp"
#include "maas/solver.hpp"
#include "maas/utility.hpp"

namespace maas {

// Sequential order acceptance for a single supplier: the MDP environment, the
// utility-driven price function, the DQN training loop with replay memory and
// a target network, and the four reference policies.

struct AcceptanceConfig {
  int slots = 3;                 // orders visible in the state
  int arrivals_per_period = 3;
  int horizon = 30;              // periods per episode
  int commit_periods = 4;        // capacity window length
  double capacity_rate = 8.0;    // Poisson hours arriving per period
  double capacity_cap = 12.0;
  double hours_min = 2.0;  // production time range, uniform draw rounded to half hours
  double hours_max = 10.0;
  double invalid_penalty = 30.0;   // B
  double waste_coefficient = 0.3;  // C
  double price_k = 0.5;
  double price_l = 0.5;
  double unit_price = 1.0;    // currency per cm^3
  double volume_scale = 10.0; // part volume at one production hour
  double volume_exponent = 0.5;  // sublinear: longer jobs earn less per hour
  double volume_noise = 0.0;     // relative jitter on the volume draw
  double gamma = 0.9;
  double utility_floor = 0.01;
  std::vector<std::string> materials = {"aluminum", "copper", "titanium", "ss-304", "ss-316"};
  std::vector<double> material_availability = {0.7, 0.4, 0.4, 0.5, 0.3};
  // due date offsets t+2 .. t+7
  std::vector<double> due_pmf = {0.10, 0.15, 0.25, 0.25, 0.15, 0.10};

  int action_count() const { return slots + 1; }  // slots plus "wait"
  int state_size() const {
    const int m = static_cast<int>(materials.size());
    return slots * (3 + m) + commit_periods + m + 1;
  }
};

// Supplier-side quantification used by the price function: urgency, material
// availability and spare capacity.
inline UtilityProfile acceptance_supplier_profile() {
  UtilityProfile p;
  p.terms.push_back({0.5, quadratic_curve(-0.240, 1.329, -0.048, 1, 8), Attribute::Urgency});
  p.terms.push_back(
      {0.4, categorical_curve({{"in_stock", 1.0}, {"not_in_stock", 0.3}}), Attribute::Material});
  p.terms.push_back({0.1, table_curve({{0.0, 0.0}, {1.0, 1.0}}, 0.0, 48.0),
                     Attribute::CapacityLevel});
  return p;
}

// p = bp + k * bp * u^(-l) with bp = unit price * volume
inline double price_for(double base_price, double utility, double k, double l) {
  if (utility <= 0.0) throw InvalidUtilityError("price requires positive utility");
  return base_price + k * base_price * std::pow(utility, -l);
}

struct EnvOrder {
  int id = 0;
  double volume = 0.0;     // cm^3
  double hours = 0.0;      // production time
  int material = 0;        // index into config.materials
  int due_period = 0;      // absolute period
  double arrival_rate = 0.0;  // quoted revenue per hour when the order arrived
};

enum class StepKind { Accepted, Invalid, Wait };

struct StepResult {
  double reward = 0.0;
  bool period_advanced = false;
  bool terminal = false;
  StepKind kind = StepKind::Wait;
  double revenue = 0.0;  // price collected when an order was accepted
};

class AcceptanceEnv {
 public:
  AcceptanceEnv(const AcceptanceConfig& config, std::uint64_t episode_seed)
      : cfg_(config),
        rng_(episode_seed),
        profile_(acceptance_supplier_profile()) {
    remaining_.assign(cfg_.commit_periods, 0.0);
    for (double& c : remaining_) c = draw_capacity();
    draw_materials();
    period_ = 1;
    spawn_arrivals();
  }

  const AcceptanceConfig& config() const { return cfg_; }
  int period() const { return period_; }
  bool terminal() const { return period_ > cfg_.horizon; }
  int orders_arrived() const { return next_order_id_; }
  const std::vector<double>& remaining_capacity() const { return remaining_; }
  const std::deque<EnvOrder>& pool() const { return pool_; }

  int queue_length() const {
    return std::max(0, static_cast<int>(pool_.size()) - cfg_.slots);
  }

  // orders that expired unaccepted, and their foregone revenue per hour
  int rejected_count() const { return rejected_count_; }
  double mean_rejected_rate() const {
    return rejected_count_ ? rejected_rate_sum_ / rejected_count_ : 0.0;
  }

  bool slot_occupied(int slot) const {
    return slot >= 0 && slot < cfg_.slots && slot < static_cast<int>(pool_.size());
  }

  const EnvOrder& slot_order(int slot) const { return pool_[slot]; }

  // hours available before the order's due date, capped at the window
  double usable_hours(const EnvOrder& o) const {
    const int usable = std::min(o.due_period - period_, cfg_.commit_periods);
    double total = 0.0;
    for (int k = 0; k < usable; ++k) total += remaining_[k];
    return total;
  }

  bool slot_feasible(int slot) const {
    if (!slot_occupied(slot)) return false;
    const EnvOrder& o = pool_[slot];
    return usable_hours(o) >= o.hours - 1e-9;
  }

  double order_utility(const EnvOrder& o) const {
    double spare = 0.0;
    for (double c : remaining_) spare += c;
    AttributeContext ctx;
    ctx.set(Attribute::Urgency, static_cast<double>(o.due_period - period_))
        .set(Attribute::Material,
             material_available_[o.material] ? "in_stock" : "not_in_stock")
        .set(Attribute::CapacityLevel, spare);
    return std::max(cfg_.utility_floor, contract_utility(profile_, ctx));
  }

  double order_price(const EnvOrder& o) const {
    return price_for(cfg_.unit_price * o.volume, order_utility(o), cfg_.price_k, cfg_.price_l);
  }

  // State vector: per slot (volume, due-in, material one-hot, validity), then
  // the remaining capacity window, material availability bits and queue
  // length. The validity flag marks orders that can actually be produced by
  // their due date; empty slots are zero-filled.
  std::vector<double> state() const {
    const int m = static_cast<int>(cfg_.materials.size());
    std::vector<double> s;
    s.reserve(cfg_.state_size());
    for (int k = 0; k < cfg_.slots; ++k) {
      if (slot_occupied(k)) {
        const EnvOrder& o = pool_[k];
        s.push_back(o.volume / 80.0);
        s.push_back(static_cast<double>(o.due_period - period_) / 7.0);
        for (int j = 0; j < m; ++j) s.push_back(j == o.material ? 1.0 : 0.0);
        s.push_back(slot_feasible(k) ? 1.0 : 0.0);
      } else {
        for (int j = 0; j < 3 + m; ++j) s.push_back(0.0);
      }
    }
    for (double c : remaining_) s.push_back(c / kHoursPerPeriod);
    for (int j = 0; j < m; ++j) s.push_back(material_available_[j] ? 1.0 : 0.0);
    s.push_back(queue_length() / 10.0);
    return s;
  }

  // action in [0, slots) selects that slot; action == slots waits
  StepResult step(int action) {
    StepResult out;
    if (terminal()) {
      out.terminal = true;
      return out;
    }
    if (action >= 0 && action < cfg_.slots) {
      if (slot_feasible(action)) {
        const EnvOrder o = pool_[action];
        const double price = order_price(o);
        debit(o);
        pool_.erase(pool_.begin() + action);  // the queue head slides into view
        out.kind = StepKind::Accepted;
        out.revenue = price;
        out.reward = price / o.hours;
        return out;
      }
      out.kind = StepKind::Invalid;
      out.reward = -cfg_.invalid_penalty;
      advance();
      out.period_advanced = true;
      out.terminal = terminal();
      return out;
    }
    out.kind = StepKind::Wait;
    out.reward = -cfg_.waste_coefficient * (cfg_.commit_periods >= 2 ? remaining_[1] : 0.0);
    advance();
    out.period_advanced = true;
    out.terminal = terminal();
    return out;
  }

 private:
  double draw_capacity() {
    return std::min(cfg_.capacity_cap, static_cast<double>(rng_.poisson(cfg_.capacity_rate)));
  }

  void draw_materials() {
    material_available_.resize(cfg_.materials.size());
    for (std::size_t j = 0; j < cfg_.materials.size(); ++j)
      material_available_[j] = rng_.bernoulli(cfg_.material_availability[j]);
  }

  void spawn_arrivals() {
    for (int k = 0; k < cfg_.arrivals_per_period; ++k) {
      EnvOrder o;
      o.id = next_order_id_++;
      o.hours = std::round(rng_.uniform(cfg_.hours_min, cfg_.hours_max) * 2.0) / 2.0;
      o.hours = std::max(0.5, o.hours);
      o.volume = cfg_.volume_scale * std::pow(o.hours, cfg_.volume_exponent) *
                 rng_.uniform(1.0 - cfg_.volume_noise, 1.0 + cfg_.volume_noise);
      o.material = static_cast<int>(rng_.pick_weighted(
          std::vector<double>(cfg_.materials.size(), 1.0)));
      const int offset = 2 + static_cast<int>(rng_.pick_weighted(cfg_.due_pmf));
      o.due_period = period_ + offset;
      o.arrival_rate = order_price(o) / o.hours;
      pool_.push_back(o);
    }
  }

  // consume hours from the latest usable periods first
  void debit(const EnvOrder& o) {
    double left = o.hours;
    const int usable = std::min(o.due_period - period_, cfg_.commit_periods);
    for (int k = usable - 1; k >= 0 && left > 1e-12; --k) {
      const double take = std::min(remaining_[k], left);
      remaining_[k] -= take;
      left -= take;
    }
    if (left > 1e-9) throw std::logic_error("debit on an infeasible order");
  }

  void advance() {
    ++period_;
    if (terminal()) return;
    // idle hours combine into the next period (the machine keeps running);
    // a fresh commitment enters at the window's far end
    if (remaining_.size() >= 2) remaining_[1] += remaining_[0];
    remaining_.erase(remaining_.begin());
    remaining_.push_back(draw_capacity());
    draw_materials();
    // drop orders that can no longer be produced before they are due
    for (auto it = pool_.begin(); it != pool_.end();) {
      if (it->due_period <= period_) {
        rejected_rate_sum_ += it->arrival_rate;
        ++rejected_count_;
        it = pool_.erase(it);
      } else {
        ++it;
      }
    }
    spawn_arrivals();
  }

  AcceptanceConfig cfg_;
  Rng rng_;
  UtilityProfile profile_;
  std::deque<EnvOrder> pool_;
  std::vector<double> remaining_;
  std::vector<bool> material_available_;
  int period_ = 1;
  int next_order_id_ = 0;
  double rejected_rate_sum_ = 0.0;
  int rejected_count_ = 0;
};

// -- reference policies --------------------------------------------------

struct EpisodeStats {
  double revenue = 0.0;
  int accepted = 0;
  int arrived = 0;
  double acceptance_rate() const { return arrived ? static_cast<double>(accepted) / arrived : 0.0; }
};

using Policy = std::function<int(const AcceptanceEnv&)>;

inline EpisodeStats run_episode(AcceptanceEnv env, const Policy& policy) {
  EpisodeStats stats;
  while (!env.terminal()) {
    const int action = policy(env);
    const StepResult r = env.step(action);
    if (r.kind == StepKind::Accepted) {
      stats.revenue += r.revenue;
      ++stats.accepted;
    }
    if (r.terminal) break;
  }
  stats.arrived = env.orders_arrived();
  return stats;
}

// highest revenue per hour among feasible slots, wait when none qualify
inline int greedy_action(const AcceptanceEnv& env) {
  int best = env.config().slots;
  double best_rate = -1.0;
  for (int k = 0; k < env.config().slots; ++k) {
    if (!env.slot_feasible(k)) continue;
    const EnvOrder& o = env.slot_order(k);
    const double rate = env.order_price(o) / o.hours;
    if (rate > best_rate + 1e-12) {
      best_rate = rate;
      best = k;
    }
  }
  return best;
}

inline Policy random_policy(std::uint64_t seed) {
  auto rng = std::make_shared<Rng>(seed);
  return [rng](const AcceptanceEnv& env) {
    std::vector<int> feasible;
    for (int k = 0; k < env.config().slots; ++k)
      if (env.slot_feasible(k)) feasible.push_back(k);
    if (feasible.empty()) return env.config().slots;
    return feasible[static_cast<std::size_t>(
        rng->uniform_int(0, static_cast<int>(feasible.size()) - 1))];
  };
}

// Revenue-maximizing subset of the current pool for this period's window,
// solved exactly; used by the rolling-horizon policy and as a period oracle.
inline std::vector<int> plan_period(const AcceptanceEnv& env) {
  const auto& pool = env.pool();
  if (pool.empty()) return {};
  BinaryProgram p;
  p.sense = Sense::Maximize;
  std::vector<int> ids;
  for (std::size_t k = 0; k < pool.size(); ++k) {
    p.objective.push_back(env.order_price(pool[k]));
    ids.push_back(static_cast<int>(k));
  }
  const auto& remaining = env.remaining_capacity();
  const int window = static_cast<int>(remaining.size());
  std::set<int> dues;
  for (const EnvOrder& o : pool)
    dues.insert(std::min(o.due_period - env.period(), window));
  for (int q : dues) {
    if (q < 1) continue;
    LinearRow row;
    row.rhs = 0.0;
    for (int t = 0; t < q; ++t) row.rhs += remaining[t];
    for (const EnvOrder& o : pool)
      row.coeffs.push_back(std::min(o.due_period - env.period(), window) <= q ? o.hours : 0.0);
    p.rows.push_back(std::move(row));
  }
  // orders due this period or earlier cannot be produced at all
  for (std::size_t k = 0; k < pool.size(); ++k)
    if (pool[k].due_period - env.period() < 1) {
      LinearRow row;
      row.coeffs.assign(pool.size(), 0.0);
      row.coeffs[k] = 1.0;
      row.rhs = 0.0;
      p.rows.push_back(std::move(row));
    }
  const Solution s = solve(p);
  std::vector<int> chosen;
  if (s.status != SolveStatus::Optimal) return chosen;
  for (std::size_t k = 0; k < pool.size(); ++k)
    if (s.assignment[k]) chosen.push_back(pool[k].id);
  return chosen;
}

// Re-plans at each period boundary and accepts planned orders as they surface
// in the slots.
inline Policy rolling_horizon_policy() {
  auto plan = std::make_shared<std::vector<int>>();
  auto planned_period = std::make_shared<int>(-1);
  return [plan, planned_period](const AcceptanceEnv& env) {
    if (*planned_period != env.period()) {
      *plan = plan_period(env);
      *planned_period = env.period();
    }
    for (int k = 0; k < env.config().slots; ++k) {
      if (!env.slot_feasible(k)) continue;
      const int id = env.slot_order(k).id;
      if (std::find(plan->begin(), plan->end(), id) != plan->end()) return k;
    }
    return env.config().slots;
  };
}

// -- DQN -----------------------------------------------------------------

struct Transition {
  std::vector<double> state;
  int action = 0;
  double reward = 0.0;
  std::vector<double> next_state;
  bool terminal = false;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

  void push(Transition t) {
    if (data_.size() < capacity_) {
      data_.push_back(std::move(t));
    } else {
      data_[cursor_] = std::move(t);
    }
    cursor_ = (cursor_ + 1) % capacity_;
  }

  std::size_t size() const { return data_.size(); }

  const Transition& sample(Rng& rng) const {
    return data_[static_cast<std::size_t>(rng.next_u64() % data_.size())];
  }

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::vector<Transition> data_;
};

struct DqnHyperparams {
  std::vector<int> hidden = {128, 64, 32};
  int episodes = 4000;
  std::size_t replay_capacity = 20000;
  std::size_t batch_size = 500;
  int updates_per_step = 1;    // M in the training loop
  int target_copy_every = 10;  // episodes between parameter copies
  double lr = 1e-4;
  double epsilon_final = 0.01;
  double epsilon_fraction = 0.8;  // fraction of episodes to reach the floor
};

inline double epsilon_at(int episode, const DqnHyperparams& hp) {
  const double span = std::max(1.0, hp.epsilon_fraction * hp.episodes);
  const double eps = std::exp(std::log(hp.epsilon_final) * episode / span);
  return std::max(hp.epsilon_final, eps);
}

inline int argmax_action(const std::vector<double>& q) {
  int best = 0;
  for (std::size_t a = 1; a < q.size(); ++a)
    if (q[a] > q[best]) best = static_cast<int>(a);
  return best;
}

struct LearningRow {
  int episode = 0;
  double epsilon = 0.0;
  double revenue = 0.0;
  double normalized_revenue = 0.0;
  double acceptance_rate = 0.0;
};

struct TrainResult {
  Mlp net;
  std::vector<LearningRow> curve;
  double random_mean = 0.0;  // revenue that defines 100 on the normalized scale
};

inline Policy greedy_q_policy(const Mlp& net) {
  return [&net](const AcceptanceEnv& env) { return argmax_action(forward(net, env.state())); };
}

inline double random_policy_mean(const AcceptanceConfig& cfg, std::uint64_t master_seed,
                                 int episodes) {
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    AcceptanceEnv env(cfg, stream_seed(master_seed, "eval-env", {static_cast<std::uint64_t>(e)}));
    total += run_episode(std::move(env),
                         random_policy(stream_seed(master_seed, "eval-random",
                                                   {static_cast<std::uint64_t>(e)})))
                 .revenue;
  }
  return episodes ? total / episodes : 1.0;
}

// The training loop: epsilon-greedy acting, uniform replay sampling, MSE
// regression of Q(s,a) toward r + gamma * max_a' Q(s', a') on the target
// network, with periodic parameter copies into the target.
inline TrainResult train_dqn(const AcceptanceConfig& cfg, const DqnHyperparams& hp,
                             std::uint64_t master_seed) {
  std::vector<int> widths;
  widths.push_back(cfg.state_size());
  for (int h : hp.hidden) widths.push_back(h);
  widths.push_back(cfg.action_count());

  Rng init_rng(stream_seed(master_seed, "init"));
  TrainResult result;
  result.net = make_mlp(widths, init_rng);
  Mlp target = result.net;
  AdamState adam = make_adam(result.net, hp.lr);
  ReplayBuffer replay(hp.replay_capacity);
  Rng batch_rng(stream_seed(master_seed, "batch"));
  Rng explore_rng(stream_seed(master_seed, "explore"));

  result.random_mean = random_policy_mean(cfg, master_seed, 50);
  const double scale = result.random_mean > 0.0 ? 100.0 / result.random_mean : 1.0;

  for (int episode = 0; episode < hp.episodes; ++episode) {
    const double eps = epsilon_at(episode, hp);
    AcceptanceEnv env(cfg,
                      stream_seed(master_seed, "train-env", {static_cast<std::uint64_t>(episode)}));
    EpisodeStats stats;
    std::vector<double> s = env.state();
    while (!env.terminal()) {
      int action;
      if (explore_rng.next_double() < eps)
        action = explore_rng.uniform_int(0, cfg.action_count() - 1);
      else
        action = argmax_action(forward(result.net, s));

      const StepResult r = env.step(action);
      if (r.kind == StepKind::Accepted) {
        stats.revenue += r.revenue;
        ++stats.accepted;
      }
      std::vector<double> s2 = env.state();
      replay.push({s, action, r.reward, s2, r.terminal});
      s = std::move(s2);

      for (int m = 0; m < hp.updates_per_step; ++m) {
        if (replay.size() < hp.batch_size) break;
        Gradients grads = zero_gradients(result.net);
        for (std::size_t b = 0; b < hp.batch_size; ++b) {
          const Transition& t = replay.sample(batch_rng);
          double target_value = t.reward;
          if (!t.terminal) {
            const std::vector<double> qn = forward(target, t.next_state);
            target_value += cfg.gamma * *std::max_element(qn.begin(), qn.end());
          }
          ForwardCache cache;
          const std::vector<double> q = forward(result.net, t.state, &cache);
          std::vector<double> out_grad(q.size(), 0.0);
          out_grad[static_cast<std::size_t>(t.action)] =
              2.0 * (q[static_cast<std::size_t>(t.action)] - target_value) / hp.batch_size;
          backward_from_output(result.net, cache, std::move(out_grad), grads);
        }
        adam_step(adam, result.net, grads);
      }
      if (r.terminal) break;
    }
    stats.arrived = env.orders_arrived();
    if ((episode + 1) % hp.target_copy_every == 0) target = result.net;

    LearningRow row;
    row.episode = episode;
    row.epsilon = eps;
    row.revenue = stats.revenue;
    row.normalized_revenue = stats.revenue * scale;
    row.acceptance_rate = stats.acceptance_rate();
    result.curve.push_back(row);
  }
  return result;
}

// -- tabular Q baseline -------------------------------------------------------

// Coarse state: (orders waiting, total remaining hours rounded to an integer).
class TabularQ {
 public:
  TabularQ(int actions, double alpha, double gamma) : actions_(actions), alpha_(alpha), gamma_(gamma) {}

  static std::pair<int, int> key(const AcceptanceEnv& env) {
    double total = 0.0;
    for (double c : env.remaining_capacity()) total += c;
    return {static_cast<int>(env.pool().size()), static_cast<int>(std::lround(total))};
  }

  std::vector<double>& row(const std::pair<int, int>& k) {
    auto it = table_.find(k);
    if (it == table_.end())
      it = table_.emplace(k, std::vector<double>(static_cast<std::size_t>(actions_), 0.0)).first;
    return it->second;
  }

  int best_action(const AcceptanceEnv& env) {
    return argmax_action(row(key(env)));
  }

  void train(const AcceptanceConfig& cfg, std::uint64_t master_seed, int episodes,
             const DqnHyperparams& schedule) {
    Rng explore(stream_seed(master_seed, "tq-explore"));
    for (int episode = 0; episode < episodes; ++episode) {
      const double eps = epsilon_at(episode, schedule);
      AcceptanceEnv env(cfg, stream_seed(master_seed, "train-env",
                                         {static_cast<std::uint64_t>(episode)}));
      while (!env.terminal()) {
        const auto k = key(env);
        int action;
        if (explore.next_double() < eps)
          action = explore.uniform_int(0, actions_ - 1);
        else
          action = argmax_action(row(k));
        const StepResult r = env.step(action);
        const auto k2 = key(env);
        double target = r.reward;
        if (!r.terminal) {
          const auto& next_row = row(k2);
          target += gamma_ * *std::max_element(next_row.begin(), next_row.end());
        }
        auto& q = row(k);
        q[static_cast<std::size_t>(action)] +=
            alpha_ * (target - q[static_cast<std::size_t>(action)]);
        if (r.terminal) break;
      }
    }
  }

  std::size_t state_count() const { return table_.size(); }

 private:
  int actions_;
  double alpha_;
  double gamma_;
  std::map<std::pair<int, int>, std::vector<double>> table_;
};

}  // namespace maas
