#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "apsim/rng.hpp"

namespace apsim {

/// M/M/servers/capacity queue: Poisson arrivals at `arrival_rate`, each busy
/// server completes at `service_rate`, at most `capacity` customers in the
/// system. Arrivals that find the system full are blocked.
struct QueueParams {
  double arrival_rate = 1.0;
  double service_rate = 1.0;
  int servers = 1;
  int capacity = 1;
  double t_max = 1.0;
  int initial = 0;
};

/// Throws std::invalid_argument on non-positive rates or horizon, or unless
/// 1 <= servers <= capacity and 0 <= initial <= capacity.
void validate(const QueueParams& params);

enum class QueueEventKind : std::uint8_t { Arrival, Departure, Blocked };
std::string_view queue_event_name(QueueEventKind k);

struct QueueEvent {
  double time;
  int occupancy;  // after the event
  QueueEventKind kind;
};

struct QueueTrace {
  QueueParams params;
  std::vector<QueueEvent> events;
};

/// Exact event-driven simulation of the birth-death chain up to t_max.
QueueTrace simulate_queue(const QueueParams& params, Rng& rng);

/// Fraction of [0, t_max] spent at each occupancy 0..capacity.
std::vector<double> occupancy_time_fractions(const QueueTrace& trace);

/// pi_n proportional to prod_{k=1..n} arrival / (service * min(k, servers)).
std::vector<double> stationary_distribution(const QueueParams& params);

/// A path sampled at increasing times. For reflected paths `regulator` holds
/// the scaled regulator and the time list includes the left limit at every
/// arrival (the same time appears twice), so the discrete Skorokhod
/// conditions hold over the listed points; `sample_positions[i]` is the entry
/// for the i-th requested grid time.
struct ScaledPath {
  double alpha = 0.0;
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> regulator;
  std::vector<std::size_t> sample_positions;

  double sample(std::size_t i) const { return values[sample_positions[i]]; }
};

/// (Y(t) - alpha t) / sqrt(alpha) for a Poisson counting path Y of intensity
/// alpha, at each grid time. The grid must be non-negative and strictly
/// increasing; alpha must be positive.
ScaledPath clt_scaled_arrivals(double alpha, std::span<const double> grid, Rng& rng);

/// The centred arrival path regulated at 0 by the Skorokhod map, scaled by
/// 1/sqrt(alpha): values hold X/sqrt(alpha), regulator Phi/sqrt(alpha). The
/// map is applied at every arrival's left limit, where the running minimum of
/// the piecewise-linear path is attained, so the result is the exact
/// continuous-time reflection of the pre-limit path.
ScaledPath reflected_walk_scaled(double alpha, std::span<const double> grid, Rng& rng);

struct LimitRow {
  double alpha;
  double t;
  double ks;  // KS distance of X(t)/sqrt(alpha) to |N(0, t)|
  std::size_t replicas;
};

struct LimitReport {
  std::vector<LimitRow> rows;
  bool decreasing = false;  // KS strictly decreasing in alpha
};

/// One row per alpha (rows sorted by alpha). Replica r of the i-th alpha in
/// sorted order uses stream (i << 32) | r of `seed`. Throws
/// std::invalid_argument for fewer than two alphas, duplicates, non-positive
/// alphas or t, or fewer than 100 replicas.
LimitReport limit_report(std::span<const double> alphas, double t, std::size_t replicas,
                         std::uint64_t seed, unsigned threads = 1);

}  // namespace apsim
