#include "apsim/observables.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace apsim {

CurrentSeries current(const EventLog& log, std::span<const double> sample_times, Species species) {
  if (sample_times.empty()) throw std::invalid_argument("empty sample grid");
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    if (!(sample_times[i] > 0.0)) throw std::invalid_argument("sample times must be positive");
    if (i > 0 && !(sample_times[i] > sample_times[i - 1]))
      throw std::invalid_argument("sample times must be strictly increasing");
  }

  CurrentSeries out;
  out.species = species;
  out.times.assign(sample_times.begin(), sample_times.end());
  out.exits.reserve(sample_times.size());
  out.values.reserve(sample_times.size());

  auto it = log.events.begin();
  std::int64_t exits = 0;
  for (double t : sample_times) {
    for (; it != log.events.end() && it->time <= t; ++it)
      exits += it->kind == EventKind::Exit && it->species == species;
    out.exits.push_back(exits);
    out.values.push_back(static_cast<double>(exits) / t);
  }
  return out;
}

std::int64_t ExitProfile::remaining_at(double t) const {
  // Last step whose time is <= t.
  auto it = std::upper_bound(remaining.begin(), remaining.end(), t,
                             [](double v, const auto& step) { return v < step.first; });
  if (it == remaining.begin()) return remaining.empty() ? 0 : remaining.front().second;
  return std::prev(it)->second;
}

ExitProfile exit_profile(const EventLog& log) {
  ExitProfile out;
  std::int64_t left = log.initial.counts().active;
  out.remaining.emplace_back(0.0, left);
  for (const Event& e : log.events) {
    if (e.kind != EventKind::Exit || e.species != Species::Active) continue;
    out.residence.push_back({e.particle, e.time});
    out.remaining.emplace_back(e.time, --left);
  }
  if (left == 0 && !out.residence.empty()) out.evacuation_time = out.residence.back().time;
  return out;
}

std::vector<std::pair<double, double>> residence_cdf(const ExitProfile& profile,
                                                     std::int64_t initial_active) {
  std::vector<double> times;
  times.reserve(profile.residence.size());
  for (const auto& r : profile.residence) times.push_back(r.time);
  std::sort(times.begin(), times.end());
  std::vector<std::pair<double, double>> out;
  out.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i)
    out.emplace_back(times[i], static_cast<double>(i + 1) / static_cast<double>(initial_active));
  return out;
}

std::pair<double, double> mean_and_se(std::vector<double> sample) {
  if (sample.empty()) throw std::invalid_argument("empty sample");
  std::sort(sample.begin(), sample.end());
  const auto n = static_cast<double>(sample.size());
  // Shifted by the smallest value so that identical samples give an exact mean.
  const double base = sample.front();
  double shift = 0.0;
  for (double v : sample) shift += v - base;
  const double mean = base + shift / n;
  if (sample.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : sample) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

Aggregate aggregate(std::span<const CurrentSeries> replicas) {
  if (replicas.empty()) throw std::invalid_argument("no replicas to aggregate");
  const auto& grid = replicas.front().times;
  for (const auto& r : replicas)
    if (r.times != grid) throw std::invalid_argument("replicas use different sample grids");

  Aggregate out;
  out.times = grid;
  out.n = replicas.size();
  out.mean.reserve(grid.size());
  out.se.reserve(grid.size());
  std::vector<double> column(replicas.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (std::size_t r = 0; r < replicas.size(); ++r) column[r] = replicas[r].values[k];
    const auto [mean, se] = mean_and_se(column);
    out.mean.push_back(mean);
    out.se.push_back(se);
  }
  return out;
}

namespace {

void apply_event(Configuration& config, const Event& e) {
  if (e.kind == EventKind::Exit)
    config.remove(e.particle);
  else
    config.move(e.particle, e.to);
}

}  // namespace

std::vector<Configuration> snapshot_series(const EventLog& log, std::span<const double> dump_times) {
  if (!log.hops_recorded) throw std::invalid_argument("snapshot replay needs a log with hops recorded");
  for (std::size_t i = 0; i < dump_times.size(); ++i) {
    if (dump_times[i] < 0.0 || dump_times[i] > log.final_time)
      throw std::out_of_range("dump time outside [0, final time]");
    if (i > 0 && dump_times[i] < dump_times[i - 1])
      throw std::invalid_argument("dump times must be non-decreasing");
  }

  std::vector<Configuration> out;
  out.reserve(dump_times.size());
  Configuration state = log.initial;
  auto it = log.events.begin();
  for (double t : dump_times) {
    for (; it != log.events.end() && it->time <= t; ++it) apply_event(state, *it);
    out.push_back(state);
  }
  return out;
}

Configuration replay(const EventLog& log) {
  if (!log.hops_recorded) throw std::invalid_argument("replay needs a log with hops recorded");
  Configuration state = log.initial;
  for (const Event& e : log.events) apply_event(state, e);
  return state;
}

std::vector<double> log_spaced_grid(double t_min, double t_max, int per_decade) {
  if (!(t_min > 0.0) || !(t_max >= t_min) || per_decade < 1)
    throw std::invalid_argument("log grid needs 0 < t_min <= t_max and per_decade >= 1");
  std::vector<double> out;
  const double decades = std::log10(t_max / t_min);
  const auto steps = static_cast<int>(std::floor(decades * per_decade + 1e-9));
  for (int k = 0; k <= steps; ++k) {
    const double t = t_min * std::pow(10.0, static_cast<double>(k) / per_decade);
    if (t < t_max) out.push_back(t);
  }
  out.push_back(t_max);
  return out;
}

}  // namespace apsim
