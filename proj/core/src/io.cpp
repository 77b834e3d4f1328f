#include "apsim/io.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <ostream>
#include <stdexcept>

namespace apsim {

void write_snapshot(std::ostream& out, const Configuration& config, double t) {
  const LatticeGeometry& g = config.geometry();
  fmt::print(out, "# t={} L={} omega={}\n", t, g.side(), g.door_width());
  std::string line(static_cast<std::size_t>(g.side()), '.');
  for (int row = g.side(); row >= 1; --row) {
    for (int col = 1; col <= g.side(); ++col) {
      const std::int8_t v = config.eta(g.index({row, col}));
      line[static_cast<std::size_t>(col - 1)] = v == 1 ? 'A' : v == -1 ? 'P' : '.';
    }
    out << line << '\n';
  }
}

void write_event_log_csv(std::ostream& out, const EventLog& log, SpeciesNaming naming) {
  const LatticeGeometry& g = log.initial.geometry();
  out << "t,particle_id,species,kind,from_row,from_col,to_row,to_col\n";
  for (const Event& e : log.events) {
    const Site from = g.site(e.from);
    const Site to = e.to == kNoSite ? Site{-1, -1} : g.site(e.to);
    fmt::print(out, "{},{},{},{},{},{},{},{}\n", e.time, e.particle, species_name(e.species, naming),
               e.kind == EventKind::Exit ? "exit" : "hop", from.row, from.col, to.row, to.col);
  }
}

void write_current_csv(std::ostream& out, const Aggregate& agg) {
  out << "t,mean,se,n\n";
  for (std::size_t k = 0; k < agg.times.size(); ++k)
    fmt::print(out, "{},{},{},{}\n", agg.times[k], agg.mean[k], agg.se[k], agg.n);
}

void write_exits_csv(std::ostream& out, const ExitProfile& profile) {
  out << "particle_id,residence_time\n";
  for (const auto& r : profile.residence) fmt::print(out, "{},{}\n", r.particle, r.time);
}

void write_remaining_csv(std::ostream& out, const ExitProfile& profile) {
  out << "t,count\n";
  for (const auto& [t, n] : profile.remaining) fmt::print(out, "{},{}\n", t, n);
}

void write_residence_cdf_csv(std::ostream& out, std::span<const std::pair<double, double>> cdf) {
  out << "residence_time,fraction\n";
  for (const auto& [t, f] : cdf) fmt::print(out, "{},{}\n", t, f);
}

void write_path_csv(std::ostream& out, const SamplePath& path, std::size_t stride) {
  if (stride == 0) throw std::invalid_argument("stride must be positive");
  out << "k,t,V,L\n";
  const std::size_t n = path.size();
  for (std::size_t k = 0; k < n; k += stride)
    fmt::print(out, "{},{},{},{}\n", k, path.time(k), path.values[k], path.local_time[k]);
  if (n > 0 && (n - 1) % stride != 0)
    fmt::print(out, "{},{},{},{}\n", n - 1, path.time(n - 1), path.values[n - 1], path.local_time[n - 1]);
}

void write_ensemble_csv(std::ostream& out, std::span<const EnsembleRow> rows) {
  out << "t,mean,var,min,max,n\n";
  for (const auto& r : rows) fmt::print(out, "{},{},{},{},{},{}\n", r.t, r.mean, r.var, r.min, r.max, r.n);
}

void write_limit_report_csv(std::ostream& out, const LimitReport& report) {
  out << "alpha,t,ks,replicas\n";
  for (const auto& r : report.rows) fmt::print(out, "{},{},{},{}\n", r.alpha, r.t, r.ks, r.replicas);
}

void write_queue_trace_csv(std::ostream& out, const QueueTrace& trace) {
  out << "t,n,kind\n";
  for (const auto& e : trace.events) fmt::print(out, "{},{},{}\n", e.time, e.occupancy, queue_event_name(e.kind));
}

void write_occupancy_csv(std::ostream& out, std::span<const double> empirical,
                         std::span<const double> stationary) {
  if (empirical.size() != stationary.size()) throw std::invalid_argument("occupancy vectors differ in length");
  out << "n,empirical,stationary\n";
  for (std::size_t n = 0; n < empirical.size(); ++n)
    fmt::print(out, "{},{},{}\n", n, empirical[n], stationary[n]);
}

}  // namespace apsim
