#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "apsim/kmc.hpp"

namespace apsim {

/// Outgoing current: exits in (0, t] divided by t, at each sample time.
struct CurrentSeries {
  std::vector<double> times;
  std::vector<std::int64_t> exits;  // cumulative exits up to each time
  std::vector<double> values;
  Species species = Species::Active;
};

/// Throws std::invalid_argument if the grid is empty, not strictly increasing
/// or not positive.
CurrentSeries current(const EventLog& log, std::span<const double> sample_times,
                      Species species = Species::Active);

struct ExitProfile {
  struct Residence {
    ParticleId particle;
    double time;
  };
  std::vector<Residence> residence;  // in exit order
  /// Step function (time, particles remaining); first entry is (0, N_A).
  std::vector<std::pair<double, std::int64_t>> remaining;
  std::optional<double> evacuation_time;  // set once every active particle left

  /// Remaining active particles at time t (right-continuous).
  std::int64_t remaining_at(double t) const;
};

ExitProfile exit_profile(const EventLog& log);

/// Empirical CDF of residence times: (sorted time, fraction of initial actives).
std::vector<std::pair<double, double>> residence_cdf(const ExitProfile& profile,
                                                     std::int64_t initial_active);

struct Aggregate {
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> se;  // sample standard deviation / sqrt(n); 0 for n = 1
  std::size_t n = 0;
};

/// Pointwise mean and standard error across replicas on a shared grid. The
/// result does not depend on replica order. Throws std::invalid_argument for
/// an empty input or mismatched grids.
Aggregate aggregate(std::span<const CurrentSeries> replicas);

/// Mean and standard error of a sample; order independent.
std::pair<double, double> mean_and_se(std::vector<double> sample);

/// Replays the log from its initial configuration and returns the state at
/// each dump time (events with time <= t applied). Dump times must be
/// non-decreasing and inside [0, final_time]; the log must record hops.
std::vector<Configuration> snapshot_series(const EventLog& log, std::span<const double> dump_times);

/// State after the last recorded event.
Configuration replay(const EventLog& log);

/// Logarithmic sample grid from t_min to t_max with `per_decade` points per
/// decade; t_max is always the last point.
std::vector<double> log_spaced_grid(double t_min, double t_max, int per_decade = 32);

}  // namespace apsim
