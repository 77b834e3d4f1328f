#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "apsim/rng.hpp"

namespace apsim {

/// Lattice site, 1-based. Row `side` is the top row and carries the door.
struct Site {
  int row = 0;
  int col = 0;
  friend bool operator==(const Site&, const Site&) = default;
};

enum class Direction : std::uint8_t { Up, Down, Left, Right };
inline constexpr std::array<Direction, 4> kDirections = {
    Direction::Up, Direction::Down, Direction::Left, Direction::Right};

enum class Species : std::uint8_t { Active, Passive };

/// Display labels. The ion naming maps Active to Na+ and Passive to Cl-.
enum class SpeciesNaming : std::uint8_t { Generic, Ions };
std::string_view species_name(Species s, SpeciesNaming naming = SpeciesNaming::Generic);

/// Whether an even side length is accepted.
enum class ParityPolicy : std::uint8_t { Relaxed, RequireOdd };

using SiteIndex = std::int32_t;
using ParticleId = std::int32_t;
inline constexpr SiteIndex kNoSite = -1;
inline constexpr ParticleId kNoParticle = -1;

/// Square room {1..L}x{1..L} with a contiguous door of `door_width` sites on
/// the top row. All other boundary edges reflect.
class LatticeGeometry {
public:
  /// Throws std::invalid_argument for side < 1, a door outside [1, side], or
  /// an even side under ParityPolicy::RequireOdd.
  LatticeGeometry(int side, int door_width, ParityPolicy parity = ParityPolicy::Relaxed);

  int side() const { return side_; }
  int door_width() const { return door_width_; }
  int door_first_col() const { return door_first_col_; }
  int door_last_col() const { return door_first_col_ + door_width_ - 1; }
  bool odd_side() const { return side_ % 2 == 1; }
  SiteIndex site_count() const { return side_ * side_; }

  bool contains(Site s) const {
    return s.row >= 1 && s.row <= side_ && s.col >= 1 && s.col <= side_;
  }
  bool is_door(Site s) const {
    return s.row == side_ && s.col >= door_first_col_ && s.col <= door_last_col();
  }
  bool is_door(SiteIndex i) const { return is_door(site(i)); }

  SiteIndex index(Site s) const { return (s.row - 1) * side_ + (s.col - 1); }
  Site site(SiteIndex i) const { return {i / side_ + 1, i % side_ + 1}; }

  /// Neighbor of site i in direction d, or kNoSite when d crosses a wall.
  SiteIndex neighbor(SiteIndex i, Direction d) const;

  /// All in-lattice nearest neighbors. Throws std::out_of_range if s is not in
  /// the lattice.
  std::vector<Site> neighbors(Site s) const;

  friend bool operator==(const LatticeGeometry&, const LatticeGeometry&) = default;

private:
  int side_;
  int door_width_;
  int door_first_col_;
};

struct Counts {
  std::int64_t active = 0;
  std::int64_t passive = 0;
  friend bool operator==(const Counts&, const Counts&) = default;
};

struct ParticleState {
  SiteIndex site = kNoSite;  // kNoSite once the particle has left
  Species species = Species::Active;
  bool present() const { return site != kNoSite; }
  friend bool operator==(const ParticleState&, const ParticleState&) = default;
};

/// Occupancy field eta in {-1, 0, +1} per site plus a registry mapping
/// particle ids to sites. Ids are never reused; a removed particle keeps its
/// registry entry with site kNoSite.
class Configuration {
public:
  explicit Configuration(const LatticeGeometry& geometry);

  const LatticeGeometry& geometry() const { return geometry_; }

  /// +1 active, -1 passive, 0 empty.
  std::int8_t eta(SiteIndex i) const { return eta_[static_cast<std::size_t>(i)]; }
  bool empty(SiteIndex i) const { return eta(i) == 0; }
  ParticleId particle_at(SiteIndex i) const { return owner_[static_cast<std::size_t>(i)]; }

  const ParticleState& particle(ParticleId id) const;
  ParticleId registry_size() const { return static_cast<ParticleId>(particles_.size()); }

  ParticleId add(Site s, Species species);
  void move(ParticleId id, SiteIndex to);
  void remove(ParticleId id);

  /// Incrementally maintained counts.
  Counts counts() const { return counts_; }
  /// Kronecker-sum recount over the occupancy field.
  Counts recount() const;

  /// Full consistency check: eta, owner map and registry agree and no two
  /// particles share a site. Returns false on the first violation.
  bool consistent() const;

  friend bool operator==(const Configuration& a, const Configuration& b) {
    return a.geometry_ == b.geometry_ && a.eta_ == b.eta_ && a.particles_ == b.particles_;
  }

private:
  ParticleState& mutable_particle(ParticleId id);

  LatticeGeometry geometry_;
  std::vector<std::int8_t> eta_;
  std::vector<ParticleId> owner_;
  std::vector<ParticleState> particles_;
  Counts counts_;
};

/// Places n_active active then n_passive passive particles on distinct sites
/// chosen uniformly at random. Active particles get ids [0, n_active).
/// Throws std::invalid_argument if the lattice cannot hold them.
Configuration random_configuration(const LatticeGeometry& geometry, std::int64_t n_active,
                                   std::int64_t n_passive, Rng& rng);

inline Counts counts(const Configuration& config) { return config.recount(); }

}  // namespace apsim
