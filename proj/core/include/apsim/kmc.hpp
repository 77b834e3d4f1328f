#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "apsim/lattice.hpp"
#include "apsim/rng.hpp"

namespace apsim {

enum class MoveKind : std::uint8_t { Up, Down, Left, Right, Exit };
inline constexpr std::size_t kMoveKinds = 5;
std::string_view move_kind_name(MoveKind k);

enum class StopRule : std::uint8_t { AtTime, AllActiveExited };

/// Only vertical drift (towards the door row) is implemented.
enum class DriftMode : std::uint8_t { Vertical };

struct KmcParams {
  double drift = 0.0;       // epsilon, in [0, 1]
  double rate_unit = 1.0;   // base hop rate per unit time
  double t_max = 1.0e6;     // horizon; also caps AllActiveExited runs
  StopRule stop = StopRule::AllActiveExited;
  DriftMode drift_mode = DriftMode::Vertical;
  bool door_open = true;
};

/// Throws std::invalid_argument when a parameter is out of range.
void validate(const KmcParams& params);

struct Move {
  ParticleId particle = kNoParticle;
  MoveKind kind = MoveKind::Up;
  double rate = 0.0;
  friend bool operator==(const Move&, const Move&) = default;
};

/// Admissible moves of one particle with positive rate, in MoveKind order.
/// Passive: rate 1 to each empty neighbor. Active: 1 sideways, 1+eps up,
/// 1-eps down, and 1+eps to leave when standing on a door site. All rates
/// are scaled by rate_unit. Throws std::out_of_range for an unknown id;
/// a particle that already left has no moves.
std::vector<std::pair<MoveKind, double>> move_rates(const Configuration& config,
                                                    const KmcParams& params, ParticleId particle);

/// Incrementally maintained table of all admissible moves.
///
/// Every move rate is one of three values (sideways, forward, backward), so
/// moves are bucketed by rate class and the total rate is computed from the
/// three integer bucket sizes. Selection is O(1) and updating one particle
/// touches at most five bucket slots.
class MoveTable {
public:
  MoveTable(const Configuration& config, const KmcParams& params);

  double total_rate() const;
  std::size_t size() const;

  /// All listed moves with positive rate, sorted by (particle, kind).
  std::vector<Move> moves() const;

  /// Move whose cumulative-rate interval contains u, for u in [0, total_rate()).
  Move select(double u) const;

  /// Recomputes the entries of one particle from the configuration.
  void refresh(const Configuration& config, ParticleId particle);
  /// Recomputes the particle on `site` and on each of its neighbors.
  void refresh_around(const Configuration& config, SiteIndex site);

private:
  enum RateClass : std::uint8_t { Sideways = 0, Forward = 1, Backward = 2 };
  struct Slot {
    ParticleId particle;
    MoveKind kind;
  };

  RateClass class_of(Species s, MoveKind k) const;
  void insert(ParticleId particle, MoveKind kind, RateClass c);
  void erase_all(ParticleId particle);

  KmcParams params_;
  std::array<double, 3> class_rate_{};
  std::array<std::vector<Slot>, 3> buckets_;
  // Per particle and move kind: position inside its bucket, or -1.
  std::vector<std::array<std::int32_t, kMoveKinds>> position_;
  std::vector<Species> species_;
};

enum class EventKind : std::uint8_t { Hop, Exit };

struct Event {
  double time = 0.0;  // offset from run start
  ParticleId particle = kNoParticle;
  Species species = Species::Active;
  EventKind kind = EventKind::Hop;
  SiteIndex from = kNoSite;
  SiteIndex to = kNoSite;  // kNoSite for exits
  friend bool operator==(const Event&, const Event&) = default;
};

/// Applies a move to the configuration and updates the table around the
/// source and destination sites.
Event apply_move(Configuration& config, MoveTable& table, const Move& move, double time);

struct StepResult {
  Event event;
  double waiting_time = 0.0;
};

/// One exact KMC step: draws the waiting time from Exponential(total rate),
/// then picks a move with probability rate / total rate and applies it.
/// Returns nullopt, leaving the state untouched, when now + waiting time
/// would exceed `horizon`. Throws std::domain_error on a frozen state.
std::optional<StepResult> kmc_step(Configuration& config, MoveTable& table, Rng& rng,
                                   double now,
                                   double horizon = std::numeric_limits<double>::infinity());

enum class Termination : std::uint8_t { AllActiveExited, ReachedTime, Frozen };
std::string_view termination_name(Termination t);

struct EventLog {
  Configuration initial;
  std::vector<Event> events;  // exits always; hops when recorded
  bool hops_recorded = true;
  std::uint64_t event_count = 0;  // all events, recorded or not
  double final_time = 0.0;
  Termination status = Termination::ReachedTime;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

struct SimulationOptions {
  bool record_hops = true;
  /// Called after every applied event.
  std::function<void(const Event&, const Configuration&, const MoveTable&)> on_event;
};

struct SimulationResult {
  EventLog log;
  Configuration final_state;
};

/// Runs KMC steps from `initial` until the stop rule fires, the horizon is
/// reached, or no move is admissible.
SimulationResult simulate(const Configuration& initial, const KmcParams& params, Rng& rng,
                          const SimulationOptions& options = {});

}  // namespace apsim
