#include "apsim/lattice.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

namespace apsim {

std::string_view species_name(Species s, SpeciesNaming naming) {
  if (naming == SpeciesNaming::Ions) return s == Species::Active ? "Na+" : "Cl-";
  return s == Species::Active ? "active" : "passive";
}

LatticeGeometry::LatticeGeometry(int side, int door_width, ParityPolicy parity)
    : side_(side), door_width_(door_width), door_first_col_(0) {
  if (side < 1) throw std::invalid_argument("lattice side must be positive, got " + std::to_string(side));
  if (parity == ParityPolicy::RequireOdd && side % 2 == 0)
    throw std::invalid_argument("lattice side must be odd, got " + std::to_string(side));
  if (door_width < 1 || door_width > side)
    throw std::invalid_argument("door width must lie in [1, " + std::to_string(side) + "], got " +
                                std::to_string(door_width));
  // Odd leftover margin: the extra column goes to the left.
  const int margin = side - door_width;
  door_first_col_ = (margin + 1) / 2 + 1;
}

SiteIndex LatticeGeometry::neighbor(SiteIndex i, Direction d) const {
  const int row = i / side_;
  const int col = i % side_;
  switch (d) {
    case Direction::Up: return row + 1 < side_ ? i + side_ : kNoSite;
    case Direction::Down: return row > 0 ? i - side_ : kNoSite;
    case Direction::Left: return col > 0 ? i - 1 : kNoSite;
    case Direction::Right: return col + 1 < side_ ? i + 1 : kNoSite;
  }
  return kNoSite;
}

std::vector<Site> LatticeGeometry::neighbors(Site s) const {
  if (!contains(s))
    throw std::out_of_range("site (" + std::to_string(s.row) + "," + std::to_string(s.col) +
                            ") is outside the lattice");
  std::vector<Site> out;
  out.reserve(4);
  const SiteIndex i = index(s);
  for (Direction d : kDirections)
    if (SiteIndex j = neighbor(i, d); j != kNoSite) out.push_back(site(j));
  return out;
}

Configuration::Configuration(const LatticeGeometry& geometry)
    : geometry_(geometry),
      eta_(static_cast<std::size_t>(geometry.site_count()), 0),
      owner_(static_cast<std::size_t>(geometry.site_count()), kNoParticle) {}

const ParticleState& Configuration::particle(ParticleId id) const {
  if (id < 0 || id >= registry_size())
    throw std::out_of_range("unknown particle id " + std::to_string(id));
  return particles_[static_cast<std::size_t>(id)];
}

ParticleState& Configuration::mutable_particle(ParticleId id) {
  particle(id);
  return particles_[static_cast<std::size_t>(id)];
}

ParticleId Configuration::add(Site s, Species species) {
  if (!geometry_.contains(s)) throw std::out_of_range("cannot place a particle outside the lattice");
  const SiteIndex i = geometry_.index(s);
  if (!empty(i)) throw std::invalid_argument("site is already occupied");
  const auto id = static_cast<ParticleId>(particles_.size());
  particles_.push_back({i, species});
  eta_[static_cast<std::size_t>(i)] = species == Species::Active ? 1 : -1;
  owner_[static_cast<std::size_t>(i)] = id;
  (species == Species::Active ? counts_.active : counts_.passive) += 1;
  return id;
}

void Configuration::move(ParticleId id, SiteIndex to) {
  auto& p = mutable_particle(id);
  if (!p.present()) throw std::logic_error("particle has already left");
  if (to < 0 || to >= geometry_.site_count()) throw std::out_of_range("target site outside the lattice");
  if (!empty(to)) throw std::logic_error("exclusion violated: target site occupied");
  eta_[static_cast<std::size_t>(to)] = eta_[static_cast<std::size_t>(p.site)];
  eta_[static_cast<std::size_t>(p.site)] = 0;
  owner_[static_cast<std::size_t>(to)] = id;
  owner_[static_cast<std::size_t>(p.site)] = kNoParticle;
  p.site = to;
}

void Configuration::remove(ParticleId id) {
  auto& p = mutable_particle(id);
  if (!p.present()) throw std::logic_error("particle has already left");
  eta_[static_cast<std::size_t>(p.site)] = 0;
  owner_[static_cast<std::size_t>(p.site)] = kNoParticle;
  p.site = kNoSite;
  (p.species == Species::Active ? counts_.active : counts_.passive) -= 1;
}

Counts Configuration::recount() const {
  Counts c;
  for (std::int8_t v : eta_) {
    c.active += v == 1;
    c.passive += v == -1;
  }
  return c;
}

bool Configuration::consistent() const {
  Counts registry;
  for (std::size_t id = 0; id < particles_.size(); ++id) {
    const auto& p = particles_[id];
    if (!p.present()) continue;
    const auto s = static_cast<std::size_t>(p.site);
    if (owner_[s] != static_cast<ParticleId>(id)) return false;
    if (eta_[s] != (p.species == Species::Active ? 1 : -1)) return false;
    (p.species == Species::Active ? registry.active : registry.passive) += 1;
  }
  for (std::size_t s = 0; s < eta_.size(); ++s) {
    if ((eta_[s] == 0) != (owner_[s] == kNoParticle)) return false;
  }
  return registry == counts_ && recount() == counts_;
}

Configuration random_configuration(const LatticeGeometry& geometry, std::int64_t n_active,
                                   std::int64_t n_passive, Rng& rng) {
  if (n_active < 0 || n_passive < 0) throw std::invalid_argument("particle counts must be non-negative");
  const std::int64_t sites = geometry.site_count();
  if (n_active + n_passive > sites)
    throw std::invalid_argument("overfull lattice: " + std::to_string(n_active + n_passive) +
                                " particles on " + std::to_string(sites) + " sites");

  std::vector<SiteIndex> order(static_cast<std::size_t>(sites));
  std::iota(order.begin(), order.end(), 0);
  const std::int64_t total = n_active + n_passive;
  // Partial Fisher-Yates: the first `total` entries are a uniform sample.
  for (std::int64_t k = 0; k < total; ++k) {
    const auto j = k + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(sites - k)));
    std::swap(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(j)]);
  }

  Configuration config(geometry);
  for (std::int64_t k = 0; k < total; ++k)
    config.add(geometry.site(order[static_cast<std::size_t>(k)]),
               k < n_active ? Species::Active : Species::Passive);
  return config;
}

}  // namespace apsim
