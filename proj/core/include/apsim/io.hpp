#pragma once

#include <iosfwd>
#include <span>

#include "apsim/kmc.hpp"
#include "apsim/lattice.hpp"
#include "apsim/observables.hpp"
#include "apsim/queueing.hpp"
#include "apsim/sde.hpp"

// Text emitters. Floating-point values use the shortest representation that
// round-trips, so equal inputs always give byte-identical files.
namespace apsim {

/// Header `# t=<t> L=<L> omega=<w>`, then L rows of `A`/`P`/`.`, door row first.
void write_snapshot(std::ostream& out, const Configuration& config, double t);

/// `t,particle_id,species,kind,from_row,from_col,to_row,to_col`; exits have
/// to_row = to_col = -1.
void write_event_log_csv(std::ostream& out, const EventLog& log,
                         SpeciesNaming naming = SpeciesNaming::Generic);

void write_current_csv(std::ostream& out, const Aggregate& agg);                        // t,mean,se,n
void write_exits_csv(std::ostream& out, const ExitProfile& profile);                    // particle_id,residence_time
void write_remaining_csv(std::ostream& out, const ExitProfile& profile);                // t,count
void write_residence_cdf_csv(std::ostream& out, std::span<const std::pair<double, double>> cdf);  // residence_time,fraction

void write_path_csv(std::ostream& out, const SamplePath& path, std::size_t stride = 1);  // k,t,V,L
void write_ensemble_csv(std::ostream& out, std::span<const EnsembleRow> rows);          // t,mean,var,min,max,n

void write_limit_report_csv(std::ostream& out, const LimitReport& report);               // alpha,t,ks,replicas
void write_queue_trace_csv(std::ostream& out, const QueueTrace& trace);                  // t,n,kind
/// n,empirical,stationary
void write_occupancy_csv(std::ostream& out, std::span<const double> empirical,
                         std::span<const double> stationary);

}  // namespace apsim
