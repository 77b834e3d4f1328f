#include "apsim/experiment.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "CLI11.hpp"
#include "json.hpp"

#include "apsim/io.hpp"
#include "apsim/kmc.hpp"
#include "apsim/lattice.hpp"
#include "apsim/observables.hpp"
#include "apsim/parallel.hpp"
#include "apsim/queueing.hpp"
#include "apsim/sde.hpp"

namespace apsim {

using json = nlohmann::ordered_json;

namespace {

struct KindInfo {
  ExperimentKind kind;
  std::string_view name;
};
constexpr KindInfo kKinds[] = {
    {ExperimentKind::QueueRoom, "queue-room"},    {ExperimentKind::IonChannel, "ion-channel"},
    {ExperimentKind::Ou, "ou"},                   {ExperimentKind::ReflectedOu, "reflected-ou"},
    {ExperimentKind::Mmwn, "mmwn"},               {ExperimentKind::LimitCheck, "limit-check"},
};

using Defaults = std::map<std::string, std::string>;

Defaults lattice_defaults() {
  return {{"L", "60"},          {"parity", "relaxed"},   {"omega", "20"},
          {"eps", "0"},         {"populations", "1200:1200"},
          {"replicas", "10"},   {"t_max", "1e6"},        {"stop", "all-exited"},
          {"rate_unit", "1"},   {"drift", "vertical"},   {"door", "open"},
          {"initial", "shared"}, {"t_min", "1"},         {"per_decade", "32"},
          {"snapshots", "0"},   {"write_events", "false"}};
}

Defaults defaults_for(ExperimentKind kind) {
  Defaults d{{"seed", "1"}};
  auto merge = [&](const Defaults& more) {
    for (const auto& [k, v] : more) d[k] = v;
  };
  switch (kind) {
    case ExperimentKind::QueueRoom:
      merge(lattice_defaults());
      merge({{"eps", "0.1,0.3,0.5"}, {"compare_no_passive", "true"}});
      break;
    case ExperimentKind::IonChannel:
      merge(lattice_defaults());
      merge({{"omega", "15,20,30,40,60"}});
      break;
    case ExperimentKind::Ou:
      merge({{"mu", "1"}, {"gamma", "1"}, {"sigma", "1"}, {"v0", "0"}, {"dt", "0.001"},
             {"horizon", "50"}, {"replicas", "100"}, {"stride", "10"}, {"path_files", "100"}});
      break;
    case ExperimentKind::ReflectedOu:
      merge({{"mu", "1.2"}, {"gamma", "10"}, {"sigma", "0.3"}, {"r", "0.5"}, {"v0", "0.5"},
             {"dt", "0.001"}, {"horizon", "50"}, {"replicas", "20"}, {"stride", "10"},
             {"path_files", "1"}});
      break;
    case ExperimentKind::Mmwn:
      merge({{"lambda", "1"}, {"mu_s", "1"}, {"servers", "2"}, {"capacity", "5"}, {"t_max", "1e4"},
             {"initial", "0"}, {"replicas", "1"}, {"write_trace", "true"}});
      break;
    case ExperimentKind::LimitCheck:
      merge({{"alphas", "10,100,1000"}, {"t", "1"}, {"replicas", "10000"}});
      break;
  }
  return d;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '[' || c == ']') {
      if (!cur.empty()) out.push_back(std::exchange(cur, {}));
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::optional<double> to_double(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<std::int64_t> to_int(std::string_view s) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc() && ptr == s.data() + s.size()) return v;
  // Accept integral values written in floating-point notation, e.g. 1e4.
  if (auto d = to_double(s); d && std::floor(*d) == *d && std::abs(*d) < 9.0e18)
    return static_cast<std::int64_t>(*d);
  return std::nullopt;
}

// Typed reads that record a violation instead of throwing.
class Reader {
public:
  explicit Reader(const ExperimentConfig& c) : config_(c) {}

  void fail(const std::string& key, std::string message) {
    violations.push_back({key, std::move(message)});
  }

  double real(const std::string& key) {
    if (auto v = to_double(trim(config_.get(key)))) return *v;
    fail(key, "not a number: '" + config_.get(key) + "'");
    return 1.0;
  }
  std::int64_t integer(const std::string& key) {
    if (auto v = to_int(trim(config_.get(key)))) return *v;
    fail(key, "not an integer: '" + config_.get(key) + "'");
    return 1;
  }
  bool flag(const std::string& key) {
    const std::string v = trim(config_.get(key));
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(key, "expected true or false, got '" + v + "'");
    return false;
  }
  std::string choice(const std::string& key, std::initializer_list<std::string_view> options) {
    const std::string v = trim(config_.get(key));
    for (auto o : options)
      if (v == o) return v;
    std::string list;
    for (auto o : options) list += (list.empty() ? "" : ", ") + std::string(o);
    fail(key, "must be one of {" + list + "}, got '" + v + "'");
    return std::string(*options.begin());
  }
  std::vector<double> reals(const std::string& key) {
    std::vector<double> out;
    for (const auto& item : split_list(config_.get(key))) {
      if (auto v = to_double(item))
        out.push_back(*v);
      else
        fail(key, "not a number: '" + item + "'");
    }
    if (out.empty()) fail(key, "needs at least one value");
    return out;
  }
  std::vector<std::int64_t> integers(const std::string& key) {
    std::vector<std::int64_t> out;
    for (const auto& item : split_list(config_.get(key))) {
      if (auto v = to_int(item))
        out.push_back(*v);
      else
        fail(key, "not an integer: '" + item + "'");
    }
    if (out.empty()) fail(key, "needs at least one value");
    return out;
  }
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs(const std::string& key) {
    std::vector<std::pair<std::int64_t, std::int64_t>> out;
    for (const auto& item : split_list(config_.get(key))) {
      const auto colon = item.find(':');
      auto a = colon == std::string::npos ? std::nullopt : to_int(item.substr(0, colon));
      auto b = colon == std::string::npos ? std::nullopt : to_int(item.substr(colon + 1));
      if (a && b && *a >= 0 && *b >= 0)
        out.emplace_back(*a, *b);
      else
        fail(key, "expected active:passive counts, got '" + item + "'");
    }
    if (out.empty()) fail(key, "needs at least one value");
    return out;
  }

  std::vector<Violation> violations;

private:
  const ExperimentConfig& config_;
};

std::uint64_t read_seed(Reader& r) {
  const std::int64_t s = r.integer("seed");
  if (s < 0) r.fail("seed", "seed must be non-negative");
  return static_cast<std::uint64_t>(s);
}

std::size_t read_count(Reader& r, const std::string& key, std::int64_t minimum) {
  const std::int64_t v = r.integer(key);
  if (v < minimum) r.fail(key, key + " must be at least " + std::to_string(minimum));
  return static_cast<std::size_t>(std::max<std::int64_t>(v, 0));
}

// ---------------------------------------------------------------- lattice

struct LatticeRun {
  std::string label;
  int omega;
  double eps;
  std::int64_t n_active;
  std::int64_t n_passive;
};

struct LatticePlan {
  int side = 1;
  ParityPolicy parity = ParityPolicy::Relaxed;
  std::vector<LatticeRun> runs;
  KmcParams base;
  bool shared_initial = true;
  double t_min = 1.0;
  int per_decade = 32;
  std::size_t snapshots = 0;
  bool write_events = false;
  std::size_t replicas = 1;
  std::uint64_t seed = 0;
  SpeciesNaming naming = SpeciesNaming::Generic;
};

LatticePlan plan_lattice(const ExperimentConfig& config, Reader& r) {
  LatticePlan p;
  p.seed = read_seed(r);
  p.naming = config.kind() == ExperimentKind::IonChannel ? SpeciesNaming::Ions : SpeciesNaming::Generic;
  const std::int64_t side = r.integer("L");
  p.parity = r.choice("parity", {"relaxed", "odd"}) == "odd" ? ParityPolicy::RequireOdd
                                                              : ParityPolicy::Relaxed;
  if (side < 1 || side > 4096) r.fail("L", "L must lie in [1, 4096]");
  else if (p.parity == ParityPolicy::RequireOdd && side % 2 == 0) r.fail("L", "L must be odd under parity=odd");
  p.side = static_cast<int>(std::clamp<std::int64_t>(side, 1, 4096));

  const auto omegas = r.integers("omega");
  for (auto w : omegas)
    if (w < 1 || w > side) r.fail("omega", "door width " + std::to_string(w) + " must lie in [1, L]");
  const auto eps = r.reals("eps");
  for (double e : eps)
    if (!(e >= 0.0 && e <= 1.0)) r.fail("eps", "ε must lie in [0,1]");
  auto populations = r.pairs("populations");
  for (const auto& [a, b] : populations)
    if (a + b > side * side) r.fail("populations", "overfull lattice");

  p.base.rate_unit = r.real("rate_unit");
  if (!(p.base.rate_unit > 0.0)) r.fail("rate_unit", "rate_unit must be positive");
  p.base.t_max = r.real("t_max");
  if (!(p.base.t_max > 0.0)) r.fail("t_max", "t_max must be positive");
  p.base.stop = r.choice("stop", {"all-exited", "at-time"}) == "at-time" ? StopRule::AtTime
                                                                       : StopRule::AllActiveExited;
  r.choice("drift", {"vertical"});
  p.base.door_open = r.choice("door", {"open", "closed"}) == "open";
  p.shared_initial = r.choice("initial", {"shared", "per-replica"}) == "shared";
  p.t_min = r.real("t_min");
  if (!(p.t_min > 0.0)) r.fail("t_min", "t_min must be positive");
  else if (p.t_min > p.base.t_max) r.fail("t_min", "t_min must not exceed t_max");
  p.per_decade = static_cast<int>(std::clamp<std::int64_t>(read_count(r, "per_decade", 1), 1, 10000));
  p.snapshots = read_count(r, "snapshots", 0);
  p.write_events = r.flag("write_events");
  p.replicas = read_count(r, "replicas", 1);

  bool compare = false;
  if (config.kind() == ExperimentKind::QueueRoom) compare = r.flag("compare_no_passive");
  if (compare) {
    const auto n = populations.size();
    for (std::size_t i = 0; i < n; ++i)
      if (populations[i].second > 0) populations.emplace_back(populations[i].first, 0);
  }
  for (auto w : omegas)
    for (double e : eps)
      for (const auto& [a, b] : populations) {
        const bool dup = std::any_of(p.runs.begin(), p.runs.end(), [&](const LatticeRun& run) {
          return run.omega == w && run.eps == e && run.n_active == a && run.n_passive == b;
        });
        if (dup) continue;
        p.runs.push_back({fmt::format("omega{}_eps{}_a{}_p{}", w, e, a, b), static_cast<int>(w), e, a, b});
      }
  return p;
}

// ------------------------------------------------------------------- OU

struct OuPlan {
  OuParams params;
  double dt = 1e-3;
  std::size_t steps = 0;
  std::size_t replicas = 1;
  std::size_t stride = 1;
  std::size_t path_files = 0;
  std::uint64_t seed = 0;
};

OuPlan plan_ou(const ExperimentConfig& config, Reader& r) {
  OuPlan p;
  p.seed = read_seed(r);
  p.params.mu = r.real("mu");
  p.params.gamma = r.real("gamma");
  if (!(p.params.gamma > 0.0)) r.fail("gamma", "gamma must be positive");
  p.params.sigma = r.real("sigma");
  if (!(p.params.sigma >= 0.0)) r.fail("sigma", "sigma must be non-negative");
  p.params.v0 = r.real("v0");
  if (config.kind() == ExperimentKind::ReflectedOu) {
    p.params.boundary = r.real("r");
    if (!(p.params.v0 >= *p.params.boundary)) r.fail("v0", "v0 must not lie below the boundary r");
  }
  p.dt = r.real("dt");
  const double horizon = r.real("horizon");
  if (!(p.dt > 0.0)) r.fail("dt", "dt must be positive");
  if (!(horizon > 0.0)) r.fail("horizon", "horizon must be positive");
  if (p.dt > 0.0 && horizon > 0.0) {
    const double steps = std::round(horizon / p.dt);
    if (steps > 1e9) r.fail("horizon", "horizon / dt exceeds 1e9 steps");
    p.steps = static_cast<std::size_t>(std::clamp(steps, 1.0, 1e9));
  }
  p.replicas = read_count(r, "replicas", 1);
  p.stride = std::max<std::size_t>(1, read_count(r, "stride", 1));
  p.path_files = read_count(r, "path_files", 0);
  return p;
}

// ---------------------------------------------------------------- queues

struct QueuePlan {
  QueueParams params;
  std::size_t replicas = 1;
  bool write_trace = true;
  std::uint64_t seed = 0;
};

QueuePlan plan_queue(Reader& r) {
  QueuePlan p;
  p.seed = read_seed(r);
  p.params.arrival_rate = r.real("lambda");
  if (!(p.params.arrival_rate > 0.0)) r.fail("lambda", "lambda must be positive");
  p.params.service_rate = r.real("mu_s");
  if (!(p.params.service_rate > 0.0)) r.fail("mu_s", "mu_s must be positive");
  const auto servers = r.integer("servers");
  const auto capacity = r.integer("capacity");
  if (capacity < 1 || capacity > 100000) r.fail("capacity", "capacity must lie in [1, 100000]");
  if (servers < 1 || servers > capacity) r.fail("servers", "servers must lie in [1, capacity]");
  p.params.servers = static_cast<int>(std::clamp<std::int64_t>(servers, 1, 100000));
  p.params.capacity = static_cast<int>(std::clamp<std::int64_t>(capacity, 1, 100000));
  p.params.t_max = r.real("t_max");
  if (!(p.params.t_max > 0.0)) r.fail("t_max", "t_max must be positive");
  const auto initial = r.integer("initial");
  if (initial < 0 || initial > capacity) r.fail("initial", "initial must lie in [0, capacity]");
  p.params.initial = static_cast<int>(std::clamp<std::int64_t>(initial, 0, 100000));
  p.replicas = read_count(r, "replicas", 1);
  p.write_trace = r.flag("write_trace");
  return p;
}

struct LimitPlan {
  std::vector<double> alphas;
  double t = 1.0;
  std::size_t replicas = 100;
  std::uint64_t seed = 0;
};

LimitPlan plan_limit(Reader& r) {
  LimitPlan p;
  p.seed = read_seed(r);
  p.alphas = r.reals("alphas");
  for (double a : p.alphas)
    if (!(a > 0.0)) r.fail("alphas", "alpha values must be positive");
  if (p.alphas.size() < 2) r.fail("alphas", "need at least two alpha values");
  auto sorted = p.alphas;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    r.fail("alphas", "alpha values must be distinct");
  p.t = r.real("t");
  if (!(p.t > 0.0)) r.fail("t", "t must be positive");
  p.replicas = read_count(r, "replicas", 100);
  return p;
}

// ---------------------------------------------------------------- output

class ArtifactWriter {
public:
  explicit ArtifactWriter(std::filesystem::path root) : root_(std::move(root)) {
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + root_.string() + ": " + ec.message());
  }

  void write(const std::string& rel, const std::function<void(std::ostream&)>& body) {
    const auto path = root_ / rel;
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw std::runtime_error("cannot create directory " + path.parent_path().string());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    body(out);
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + path.string());
    files.push_back(rel);
  }

  void write_json(const std::string& rel, const json& j) {
    write(rel, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
  }

  const std::filesystem::path& root() const { return root_; }
  std::vector<std::string> files;

private:
  std::filesystem::path root_;
};

constexpr std::uint64_t kInitialStream = std::uint64_t{1} << 63;

json run_lattice(const LatticePlan& plan, ArtifactWriter& out, unsigned threads) {
  struct Task {
    std::size_t run;
    std::size_t replica;
  };
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < plan.runs.size(); ++i)
    for (std::size_t r = 0; r < plan.replicas; ++r) tasks.push_back({i, r});

  const bool full_log_first = plan.snapshots > 0 || plan.write_events;
  auto logs = parallel_map(tasks.size(), threads, [&](std::size_t k) {
    const LatticeRun& run = plan.runs[tasks[k].run];
    const std::size_t replica = tasks[k].replica;
    const LatticeGeometry geometry(plan.side, run.omega, plan.parity);
    KmcParams params = plan.base;
    params.drift = run.eps;
    Rng rng(plan.seed, replica);
    Configuration initial = [&] {
      if (!plan.shared_initial) return random_configuration(geometry, run.n_active, run.n_passive, rng);
      Rng init_rng(plan.seed, kInitialStream);
      return random_configuration(geometry, run.n_active, run.n_passive, init_rng);
    }();
    SimulationOptions options;
    options.record_hops = full_log_first && replica == 0;
    EventLog log = simulate(initial, params, rng, options).log;
    log.seed = plan.seed;
    log.stream = replica;
    return log;
  });

  json summary = json::array();
  for (std::size_t i = 0; i < plan.runs.size(); ++i) {
    const LatticeRun& run = plan.runs[i];
    const std::span<const EventLog> replicas(logs.data() + i * plan.replicas, plan.replicas);
    double t_end = plan.base.t_max;
    if (plan.base.stop == StopRule::AllActiveExited) {
      t_end = 0.0;
      for (const auto& log : replicas) t_end = std::max(t_end, log.final_time);
      if (!(t_end > 0.0)) t_end = plan.t_min;
    }
    const auto grid = log_spaced_grid(std::min(plan.t_min, t_end), t_end, plan.per_decade);
    std::vector<CurrentSeries> currents;
    for (const auto& log : replicas) currents.push_back(current(log, grid));
    const Aggregate agg = aggregate(currents);
    const EventLog& first = replicas.front();
    const ExitProfile profile = exit_profile(first);
    const auto cdf = residence_cdf(profile, run.n_active);

    const std::string dir = run.label + "/";
    out.write(dir + "current.csv", [&](std::ostream& o) { write_current_csv(o, agg); });
    out.write(dir + "exits.csv", [&](std::ostream& o) { write_exits_csv(o, profile); });
    out.write(dir + "remaining.csv", [&](std::ostream& o) { write_remaining_csv(o, profile); });
    out.write(dir + "exit_cdf.csv", [&](std::ostream& o) { write_residence_cdf_csv(o, cdf); });
    if (plan.write_events)
      out.write(dir + "events.csv", [&](std::ostream& o) { write_event_log_csv(o, first, plan.naming); });
    if (plan.snapshots > 0) {
      std::vector<double> times;
      for (std::size_t k = 0; k < plan.snapshots; ++k)
        times.push_back(plan.snapshots == 1 ? first.final_time
                                            : first.final_time * static_cast<double>(k) /
                                                  static_cast<double>(plan.snapshots - 1));
      times.back() = first.final_time;
      const auto frames = snapshot_series(first, times);
      for (std::size_t k = 0; k < frames.size(); ++k)
        out.write(fmt::format("{}snapshots/snapshot_{:02}.txt", dir, k),
                  [&](std::ostream& o) { write_snapshot(o, frames[k], times[k]); });
    }

    const LatticeGeometry geometry(plan.side, run.omega, plan.parity);
    json reps = json::array();
    for (std::size_t r = 0; r < replicas.size(); ++r) {
      const auto& log = replicas[r];
      reps.push_back({{"replica", r},
                      {"stream", log.stream},
                      {"status", termination_name(log.status)},
                      {"final_time", log.final_time},
                      {"events", log.event_count},
                      {"exits", exit_profile(log).residence.size()}});
    }
    json meta = {
        {"label", run.label},
        {"seed", plan.seed},
        {"initial_stream", plan.shared_initial ? json(kInitialStream) : json("replica")},
        {"geometry",
         {{"L", plan.side},
          {"omega", run.omega},
          {"door_first_col", geometry.door_first_col()},
          {"door_last_col", geometry.door_last_col()},
          {"odd_side", geometry.odd_side()}}},
        {"species", {{"active", species_name(Species::Active, plan.naming)},
                     {"passive", species_name(Species::Passive, plan.naming)}}},
        {"params",
         {{"eps", run.eps},
          {"rate_unit", plan.base.rate_unit},
          {"t_max", plan.base.t_max},
          {"stop", plan.base.stop == StopRule::AtTime ? "at-time" : "all-exited"},
          {"drift", "vertical"},
          {"door", plan.base.door_open ? "open" : "closed"}}},
        {"populations", {{"active", run.n_active}, {"passive", run.n_passive}}},
        {"replicas", reps}};
    out.write_json(dir + "run.json", meta);
    summary.push_back({{"label", run.label},
                       {"final_mean_current", agg.mean.back()},
                       {"final_se", agg.se.back()}});
  }
  return summary;
}

json run_ou(const OuPlan& plan, bool reflected, ArtifactWriter& out, unsigned threads) {
  struct Pair {
    SamplePath main;
    SamplePath free;
  };
  auto paths = parallel_map(plan.replicas, threads, [&](std::size_t p) {
    Rng rng(plan.seed, p);
    Pair pair;
    if (reflected) {
      pair.main = reflected_ou(plan.params, plan.dt, plan.steps, rng);
      Rng twin(plan.seed, p);
      pair.free = euler_maruyama_ou(plan.params, plan.dt, plan.steps, twin);
    } else {
      pair.main = euler_maruyama_ou(plan.params, plan.dt, plan.steps, rng);
    }
    return pair;
  });

  std::vector<SamplePath> main, free;
  for (auto& p : paths) {
    main.push_back(std::move(p.main));
    if (reflected) free.push_back(std::move(p.free));
  }
  const std::size_t files = std::min(plan.path_files, plan.replicas);
  const std::string main_dir = reflected ? "reflected/" : "paths/";
  for (std::size_t p = 0; p < files; ++p) {
    out.write(fmt::format("{}path_{:03}.csv", main_dir, p),
              [&](std::ostream& o) { write_path_csv(o, main[p], plan.stride); });
    if (reflected)
      out.write(fmt::format("free/path_{:03}.csv", p),
                [&](std::ostream& o) { write_path_csv(o, free[p], plan.stride); });
  }
  const auto rows = ensemble_summary(main, plan.stride);
  out.write(reflected ? "reflected_ensemble.csv" : "ensemble.csv",
            [&](std::ostream& o) { write_ensemble_csv(o, rows); });
  if (reflected) {
    const auto free_rows = ensemble_summary(free, plan.stride);
    out.write("free_ensemble.csv", [&](std::ostream& o) { write_ensemble_csv(o, free_rows); });
  }

  const auto [mean, var] = ou_stationary_moments(plan.params);
  double lowest = main.front().values.front(), local = 0.0;
  for (const auto& p : main) {
    lowest = std::min(lowest, *std::min_element(p.values.begin(), p.values.end()));
    local = std::max(local, p.local_time.back());
  }
  json j = {{"stationary_mean", mean}, {"stationary_variance", var}, {"steps", plan.steps},
            {"min_value", lowest}};
  if (reflected) j["max_local_time"] = local;
  return j;
}

json run_queue(const QueuePlan& plan, ArtifactWriter& out, unsigned threads) {
  auto fractions = parallel_map(plan.replicas, threads, [&](std::size_t r) {
    Rng rng(plan.seed, r);
    QueueTrace trace = simulate_queue(plan.params, rng);
    auto f = occupancy_time_fractions(trace);
    if (!(r == 0 && plan.write_trace)) trace.events.clear();
    return std::pair{std::move(f), std::move(trace)};
  });
  std::vector<double> empirical(static_cast<std::size_t>(plan.params.capacity) + 1, 0.0);
  for (const auto& [f, _] : fractions)
    for (std::size_t n = 0; n < f.size(); ++n) empirical[n] += f[n] / static_cast<double>(plan.replicas);
  const auto stationary = stationary_distribution(plan.params);
  if (plan.write_trace)
    out.write("trace.csv", [&](std::ostream& o) { write_queue_trace_csv(o, fractions.front().second); });
  out.write("occupancy.csv", [&](std::ostream& o) { write_occupancy_csv(o, empirical, stationary); });
  double tv = 0.0;
  for (std::size_t n = 0; n < empirical.size(); ++n) tv += 0.5 * std::abs(empirical[n] - stationary[n]);
  return {{"total_variation", tv}};
}

json run_limit(const LimitPlan& plan, ArtifactWriter& out, unsigned threads) {
  const LimitReport report = limit_report(plan.alphas, plan.t, plan.replicas, plan.seed, threads);
  out.write("limit_report.csv", [&](std::ostream& o) { write_limit_report_csv(o, report); });
  json rows = json::array();
  for (const auto& row : report.rows) rows.push_back({{"alpha", row.alpha}, {"ks", row.ks}});
  return {{"rows", rows}, {"ks_decreasing", report.decreasing}};
}

}  // namespace

std::string_view kind_name(ExperimentKind kind) {
  for (const auto& k : kKinds)
    if (k.kind == kind) return k.name;
  return "?";
}

std::optional<ExperimentKind> parse_kind(std::string_view name) {
  for (const auto& k : kKinds)
    if (k.name == name) return k.kind;
  return std::nullopt;
}

std::vector<ExperimentKind> all_kinds() {
  std::vector<ExperimentKind> out;
  for (const auto& k : kKinds) out.push_back(k.kind);
  return out;
}

ExperimentConfig::ExperimentConfig(ExperimentKind kind) : kind_(kind), entries_(defaults_for(kind)) {}

std::string ExperimentConfig::get(const std::string& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? std::string{} : it->second;
}

void ExperimentConfig::set(const std::string& key, std::string value) { entries_[key] = std::move(value); }

std::string ExperimentConfig::canonical_text() const {
  std::string s = "[" + std::string(kind_name(kind_)) + "]\n";
  for (const auto& [k, v] : entries_) s += k + " = " + v + "\n";
  return s;
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canonical_text()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return fmt::format("{:016x}", h);
}

namespace {

std::vector<CLI::ConfigItem> parse_ini(std::istream& in) {
  try {
    return CLI::ConfigINI().from_config(in);
  } catch (const CLI::Error& e) {
    throw std::invalid_argument(std::string("malformed config file: ") + e.what());
  }
}

bool is_marker(const CLI::ConfigItem& item) { return item.name == "++" || item.name == "--"; }

std::string join_inputs(const std::vector<std::string>& inputs) {
  std::string v;
  for (const auto& s : inputs) v += (v.empty() ? "" : ",") + s;
  return v;
}

}  // namespace

ExperimentConfig load_config(std::istream& in, ExperimentKind kind) {
  ExperimentConfig config(kind);
  const auto items = parse_ini(in);
  // Global keys first so that section keys win.
  for (const auto& item : items)
    if (item.parents.empty() && !is_marker(item)) config.set(item.name, join_inputs(item.inputs));
  for (const auto& item : items)
    if (item.parents.size() == 1 && item.parents.front() == kind_name(kind) && !is_marker(item))
      config.set(item.name, join_inputs(item.inputs));
  return config;
}

std::vector<ExperimentKind> sections_in(std::istream& in) {
  std::vector<ExperimentKind> out;
  for (const auto& item : parse_ini(in)) {
    if (item.parents.size() != 1) continue;
    if (auto k = parse_kind(item.parents.front()); k && std::find(out.begin(), out.end(), *k) == out.end())
      out.push_back(*k);
  }
  return out;
}

void apply_override(ExperimentConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw std::invalid_argument("expected key=value, got '" + std::string(assignment) + "'");
  config.set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::vector<Violation> validate(const ExperimentConfig& config) {
  Reader r(config);
  const Defaults known = defaults_for(config.kind());
  for (const auto& [k, v] : config.entries())
    if (!known.contains(k)) r.fail(k, "unknown key for " + std::string(kind_name(config.kind())));
  switch (config.kind()) {
    case ExperimentKind::QueueRoom:
    case ExperimentKind::IonChannel: plan_lattice(config, r); break;
    case ExperimentKind::Ou:
    case ExperimentKind::ReflectedOu: plan_ou(config, r); break;
    case ExperimentKind::Mmwn: plan_queue(r); break;
    case ExperimentKind::LimitCheck: plan_limit(r); break;
  }
  return std::move(r.violations);
}

ValidationError::ValidationError(std::vector<Violation> v)
    : std::runtime_error("invalid experiment configuration"), violations_(std::move(v)) {}

Manifest run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                        unsigned threads) {
  if (auto v = validate(config); !v.empty()) throw ValidationError(std::move(v));

  ArtifactWriter out(out_dir);
  Reader r(config);
  json results;
  std::uint64_t seed = 0;
  switch (config.kind()) {
    case ExperimentKind::QueueRoom:
    case ExperimentKind::IonChannel: {
      const auto plan = plan_lattice(config, r);
      seed = plan.seed;
      results = run_lattice(plan, out, threads);
      break;
    }
    case ExperimentKind::Ou:
    case ExperimentKind::ReflectedOu: {
      const auto plan = plan_ou(config, r);
      seed = plan.seed;
      results = run_ou(plan, config.kind() == ExperimentKind::ReflectedOu, out, threads);
      break;
    }
    case ExperimentKind::Mmwn: {
      const auto plan = plan_queue(r);
      seed = plan.seed;
      results = run_queue(plan, out, threads);
      break;
    }
    case ExperimentKind::LimitCheck: {
      const auto plan = plan_limit(r);
      seed = plan.seed;
      results = run_limit(plan, out, threads);
      break;
    }
  }

  Manifest m{out.root(), out.files, config.hash(), seed};
  json manifest = {{"kind", kind_name(config.kind())},
                   {"config_hash", m.config_hash},
                   {"seed", seed},
                   {"streams", "replica r uses stream r of the master seed"},
                   {"config", config.entries()},
                   {"files", m.files},
                   {"results", results}};
  out.write_json("manifest.json", manifest);
  return m;
}

std::filesystem::path default_output_root() {
  if (const char* env = std::getenv("APSIM_OUTPUT_ROOT"); env && *env) return env;
  return "apsim_out";
}

}  // namespace apsim
