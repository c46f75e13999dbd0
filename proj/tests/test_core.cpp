#include <catch2/catch_amalgamated.hpp>

#include "maas/core.hpp"
#include "maas/rng.hpp"

using namespace maas;

namespace {

Machine make_machine(Process p, std::set<std::string> mats, double res_lo, double res_hi,
                     std::vector<double> caps) {
  Machine m;
  m.id = 1;
  m.process = p;
  m.materials = std::move(mats);
  m.resolution_range = {res_lo, res_hi};
  m.capacity_by_period = std::move(caps);
  m.unit_threshold_band = {0.4, 0.6};
  return m;
}

Order make_order(Process p, std::string mat, double res) {
  Order o;
  o.id = 7;
  o.part_volume = 10.0;
  o.production_time_by_process[p] = 4.0;
  o.material = std::move(mat);
  o.process = p;
  o.resolution = res;
  o.arrival_period = 1;
  o.due_period = 4;
  return o;
}

}  // namespace

TEST_CASE("capability_match checks process, material and resolution") {
  Machine m = make_machine(Process::FDM, {"PLA", "ABS"}, 100, 300, {4, 4});
  CHECK(capability_match(make_order(Process::FDM, "PLA", 200), m));
  CHECK_FALSE(capability_match(make_order(Process::SLA, "Resin", 200), m));
  CHECK_FALSE(capability_match(make_order(Process::FDM, "PLA", 50), m));
  // inclusive bounds
  CHECK(capability_match(make_order(Process::FDM, "PLA", 100), m));
  CHECK(capability_match(make_order(Process::FDM, "PLA", 300), m));
  CHECK_FALSE(capability_match(make_order(Process::FDM, "Nylon", 200), m));
}

TEST_CASE("cumulative_capacity sums a prefix of the committed hours") {
  Machine m = make_machine(Process::FDM, {"PLA"}, 100, 300, {4, 6, 2});
  CHECK(cumulative_capacity(m, 2) == Catch::Approx(10.0));
  CHECK(cumulative_capacity(m, 0) == Catch::Approx(0.0));
  CHECK(cumulative_capacity(m, 3) == Catch::Approx(12.0));
  CHECK_THROWS_AS(cumulative_capacity(m, 4), HorizonError);
}

TEST_CASE("cumulative_capacity is monotone in the horizon") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> caps;
    const int n = rng.uniform_int(1, 8);
    for (int i = 0; i < n; ++i) caps.push_back(rng.uniform(0.0, 10.0));
    Machine m = make_machine(Process::FDM, {"PLA"}, 100, 300, caps);
    double prev = 0.0;
    for (int q = 0; q <= n; ++q) {
      const double c = cumulative_capacity(m, q);
      CHECK(c >= prev);
      prev = c;
    }
  }
}

TEST_CASE("cumulative_feasible checks every due-period prefix") {
  Machine m = make_machine(Process::FDM, {"PLA"}, 100, 300, {4, 6});
  CHECK(cumulative_feasible(m, {{4.0, 1}}));
  CHECK_FALSE(cumulative_feasible(m, {{5.0, 1}}));
  CHECK(cumulative_feasible(m, {{3.0, 1}, {6.0, 2}}));
  CHECK(cumulative_feasible(m, {}));
  // a job due past the horizon only needs total committed hours
  CHECK(cumulative_feasible(m, {{10.0, 9}}));
  CHECK_FALSE(cumulative_feasible(m, {{10.1, 9}}));
}

TEST_CASE("removing a job never breaks feasibility") {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> caps;
    const int n = rng.uniform_int(1, 4);
    for (int i = 0; i < n; ++i) caps.push_back(rng.uniform(0.0, 8.0));
    Machine m = make_machine(Process::FDM, {"PLA"}, 100, 300, caps);
    std::vector<Job> jobs;
    const int k = rng.uniform_int(1, 5);
    for (int i = 0; i < k; ++i)
      jobs.push_back({rng.uniform(0.5, 6.0), rng.uniform_int(1, n)});
    if (!cumulative_feasible(m, jobs)) continue;
    for (std::size_t drop = 0; drop < jobs.size(); ++drop) {
      std::vector<Job> fewer = jobs;
      fewer.erase(fewer.begin() + static_cast<long>(drop));
      CHECK(cumulative_feasible(m, fewer));
    }
  }
}

TEST_CASE("validation rejects malformed entities") {
  Supplier s;
  s.id = 1;
  s.rating = 4.0;
  CHECK_THROWS_AS(validate(s), ConfigError);  // no machines
  s.machines.push_back(make_machine(Process::FDM, {"PLA"}, 100, 300, {4}));
  CHECK_NOTHROW(validate(s));
  s.rating = 5.5;
  CHECK_THROWS_AS(validate(s), ConfigError);

  Order o = make_order(Process::FDM, "PLA", 200);
  CHECK_NOTHROW(validate(o));
  o.due_period = o.arrival_period;
  CHECK_THROWS_AS(validate(o), ConfigError);
  o.due_period = 4;
  o.part_volume = 0.0;
  CHECK_THROWS_AS(validate(o), ConfigError);

  Machine bad = make_machine(Process::FDM, {"PLA"}, 100, 300, {4});
  bad.unit_threshold_band = {0.7, 0.2};
  CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("process and size-class names round-trip") {
  for (Process p : {Process::FDM, Process::SLA, Process::SlsPolymer, Process::SlsMetal,
                    Process::MaterialJetting, Process::DLP, Process::MJP})
    CHECK(process_from_string(to_string(p)) == p);
  for (SizeClass s : {SizeClass::Small, SizeClass::Medium, SizeClass::Large})
    CHECK(size_class_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(process_from_string("carving"), ConfigError);
}
