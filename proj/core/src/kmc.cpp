#include "apsim/kmc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace apsim {

std::string_view move_kind_name(MoveKind k) {
  switch (k) {
    case MoveKind::Up: return "up";
    case MoveKind::Down: return "down";
    case MoveKind::Left: return "left";
    case MoveKind::Right: return "right";
    case MoveKind::Exit: return "exit";
  }
  return "?";
}

std::string_view termination_name(Termination t) {
  switch (t) {
    case Termination::AllActiveExited: return "all_active_exited";
    case Termination::ReachedTime: return "reached_time";
    case Termination::Frozen: return "frozen";
  }
  return "?";
}

void validate(const KmcParams& params) {
  if (!(params.drift >= 0.0 && params.drift <= 1.0))
    throw std::invalid_argument("drift must lie in [0, 1]");
  if (!(params.rate_unit > 0.0) || !std::isfinite(params.rate_unit))
    throw std::invalid_argument("rate unit must be positive and finite");
  if (!(params.t_max > 0.0)) throw std::invalid_argument("horizon must be positive");
}

namespace {

constexpr Direction to_direction(MoveKind k) { return static_cast<Direction>(k); }

// Rates before scaling by rate_unit.
double base_rate(Species s, MoveKind k, double drift) {
  if (s == Species::Passive) return 1.0;
  switch (k) {
    case MoveKind::Up:
    case MoveKind::Exit: return 1.0 + drift;
    case MoveKind::Down: return 1.0 - drift;
    default: return 1.0;
  }
}

template <typename Fn>
void for_each_admissible(const Configuration& config, const KmcParams& params, ParticleId id,
                         Fn&& fn) {
  const ParticleState& p = config.particle(id);
  if (!p.present()) return;
  const LatticeGeometry& g = config.geometry();
  for (Direction d : kDirections) {
    const SiteIndex to = g.neighbor(p.site, d);
    if (to != kNoSite && config.empty(to)) fn(static_cast<MoveKind>(d));
  }
  if (params.door_open && p.species == Species::Active && g.is_door(p.site)) fn(MoveKind::Exit);
}

}  // namespace

std::vector<std::pair<MoveKind, double>> move_rates(const Configuration& config,
                                                    const KmcParams& params, ParticleId particle) {
  std::vector<std::pair<MoveKind, double>> out;
  const Species s = config.particle(particle).species;
  for_each_admissible(config, params, particle, [&](MoveKind k) {
    const double rate = params.rate_unit * base_rate(s, k, params.drift);
    if (rate > 0.0) out.emplace_back(k, rate);
  });
  return out;
}

MoveTable::MoveTable(const Configuration& config, const KmcParams& params) : params_(params) {
  validate(params);
  class_rate_[Sideways] = params.rate_unit;
  class_rate_[Forward] = params.rate_unit * (1.0 + params.drift);
  class_rate_[Backward] = params.rate_unit * (1.0 - params.drift);

  const auto n = static_cast<std::size_t>(config.registry_size());
  position_.assign(n, {-1, -1, -1, -1, -1});
  species_.resize(n);
  for (ParticleId id = 0; id < config.registry_size(); ++id) {
    species_[static_cast<std::size_t>(id)] = config.particle(id).species;
    refresh(config, id);
  }
}

MoveTable::RateClass MoveTable::class_of(Species s, MoveKind k) const {
  if (s == Species::Passive) return Sideways;
  switch (k) {
    case MoveKind::Up:
    case MoveKind::Exit: return Forward;
    case MoveKind::Down: return Backward;
    default: return Sideways;
  }
}

double MoveTable::total_rate() const {
  double total = 0.0;
  for (std::size_t c = 0; c < 3; ++c)
    total += static_cast<double>(buckets_[c].size()) * class_rate_[c];
  return total;
}

std::size_t MoveTable::size() const {
  std::size_t n = 0;
  for (std::size_t c = 0; c < 3; ++c)
    if (class_rate_[c] > 0.0) n += buckets_[c].size();
  return n;
}

std::vector<Move> MoveTable::moves() const {
  std::vector<Move> out;
  out.reserve(size());
  for (std::size_t c = 0; c < 3; ++c) {
    if (class_rate_[c] <= 0.0) continue;
    for (const Slot& s : buckets_[c]) out.push_back({s.particle, s.kind, class_rate_[c]});
  }
  std::sort(out.begin(), out.end(), [](const Move& a, const Move& b) {
    return a.particle != b.particle ? a.particle < b.particle : a.kind < b.kind;
  });
  return out;
}

Move MoveTable::select(double u) const {
  std::size_t last = 3;
  for (std::size_t c = 0; c < 3; ++c) {
    const double rate = class_rate_[c];
    const auto count = buckets_[c].size();
    if (rate <= 0.0 || count == 0) continue;
    last = c;
    const double weight = static_cast<double>(count) * rate;
    if (u < weight) {
      const auto idx = std::min(count - 1, static_cast<std::size_t>(u / rate));
      const Slot& s = buckets_[c][idx];
      return {s.particle, s.kind, rate};
    }
    u -= weight;
  }
  // Rounding pushed u past the final bucket.
  if (last == 3) throw std::domain_error("no admissible move");
  const Slot& s = buckets_[last].back();
  return {s.particle, s.kind, class_rate_[last]};
}

void MoveTable::insert(ParticleId particle, MoveKind kind, RateClass c) {
  auto& bucket = buckets_[c];
  position_[static_cast<std::size_t>(particle)][static_cast<std::size_t>(kind)] =
      static_cast<std::int32_t>(bucket.size());
  bucket.push_back({particle, kind});
}

void MoveTable::erase_all(ParticleId particle) {
  auto& pos = position_[static_cast<std::size_t>(particle)];
  const Species s = species_[static_cast<std::size_t>(particle)];
  for (std::size_t k = 0; k < kMoveKinds; ++k) {
    const std::int32_t at = pos[k];
    if (at < 0) continue;
    auto& bucket = buckets_[class_of(s, static_cast<MoveKind>(k))];
    const Slot moved = bucket.back();
    bucket[static_cast<std::size_t>(at)] = moved;
    position_[static_cast<std::size_t>(moved.particle)][static_cast<std::size_t>(moved.kind)] = at;
    bucket.pop_back();
    pos[k] = -1;
  }
}

void MoveTable::refresh(const Configuration& config, ParticleId particle) {
  erase_all(particle);
  const Species s = species_[static_cast<std::size_t>(particle)];
  for_each_admissible(config, params_, particle,
                      [&](MoveKind k) { insert(particle, k, class_of(s, k)); });
}

void MoveTable::refresh_around(const Configuration& config, SiteIndex site) {
  if (const ParticleId p = config.particle_at(site); p != kNoParticle) refresh(config, p);
  const LatticeGeometry& g = config.geometry();
  for (Direction d : kDirections) {
    const SiteIndex n = g.neighbor(site, d);
    if (n == kNoSite) continue;
    if (const ParticleId p = config.particle_at(n); p != kNoParticle) refresh(config, p);
  }
}

Event apply_move(Configuration& config, MoveTable& table, const Move& move, double time) {
  const ParticleState& p = config.particle(move.particle);
  Event e{time, move.particle, p.species, EventKind::Hop, p.site, kNoSite};
  if (move.kind == MoveKind::Exit) {
    e.kind = EventKind::Exit;
    config.remove(move.particle);
    table.refresh(config, move.particle);
    table.refresh_around(config, e.from);
    return e;
  }
  e.to = config.geometry().neighbor(e.from, to_direction(move.kind));
  config.move(move.particle, e.to);
  table.refresh_around(config, e.from);  // includes the mover, now a neighbor of `from`
  table.refresh_around(config, e.to);
  return e;
}

std::optional<StepResult> kmc_step(Configuration& config, MoveTable& table, Rng& rng, double now,
                                   double horizon) {
  const double total = table.total_rate();
  if (!(total > 0.0)) throw std::domain_error("frozen state: total rate is zero");
  const double tau = rng.exponential(total);
  if (now + tau > horizon) return std::nullopt;
  const Move m = table.select(rng.uniform() * total);
  return StepResult{apply_move(config, table, m, now + tau), tau};
}

SimulationResult simulate(const Configuration& initial, const KmcParams& params, Rng& rng,
                          const SimulationOptions& options) {
  validate(params);
  SimulationResult out{EventLog{initial, {}}, initial};
  EventLog& log = out.log;
  log.hops_recorded = options.record_hops;
  Configuration& state = out.final_state;
  MoveTable table(state, params);

  double now = 0.0;
  for (;;) {
    if (params.stop == StopRule::AllActiveExited && state.counts().active == 0) {
      log.status = Termination::AllActiveExited;
      break;
    }
    if (!(table.total_rate() > 0.0)) {
      log.status = Termination::Frozen;
      break;
    }
    auto step = kmc_step(state, table, rng, now, params.t_max);
    if (!step) {
      now = params.t_max;
      log.status = Termination::ReachedTime;
      break;
    }
    now = step->event.time;
    ++log.event_count;
    if (options.record_hops || step->event.kind == EventKind::Exit) log.events.push_back(step->event);
    if (options.on_event) options.on_event(step->event, state, table);
  }
  log.final_time = now;
  return out;
}

}  // namespace apsim
