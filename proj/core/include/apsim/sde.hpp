#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "apsim/rng.hpp"

namespace apsim {

/// Discretised path on a uniform grid t_k = k * dt.
struct SamplePath {
  double dt = 0.0;
  std::vector<double> values;
  /// Cumulative reflection pushed in up to step k; all zeros for free paths.
  std::vector<double> local_time;
  std::optional<double> boundary;

  double time(std::size_t k) const { return static_cast<double>(k) * dt; }
  std::size_t size() const { return values.size(); }
};

struct SkorokhodResult {
  std::vector<double> reflected;  // x = y + phi, x >= boundary
  std::vector<double> regulator;  // phi, non-decreasing from 0
};

/// One-sided Skorokhod map at `boundary`:
/// phi_k = max(0, max_{j<=k} (boundary - y_j)), x_k = y_k + phi_k.
/// Where phi reaches a new maximum x_k is set to the boundary exactly, and
/// elsewhere x_k is clamped at the boundary, so the output satisfies the
/// Skorokhod conditions without rounding slack. Throws std::invalid_argument
/// if y is empty or y_0 < boundary.
SkorokhodResult skorokhod_map(std::span<const double> y, double boundary);

/// dV = (mu - V/gamma) dt + sigma dW [+ dL at the boundary].
/// gamma may be +infinity (no mean reversion).
struct OuParams {
  double mu = 1.0;
  double gamma = 1.0;
  double sigma = 1.0;
  double v0 = 0.0;
  std::optional<double> boundary;
};

/// Throws std::invalid_argument unless gamma > 0, sigma >= 0 and, with a
/// boundary, v0 >= boundary.
void validate(const OuParams& params);

/// Plain Euler-Maruyama. The boundary, if any, is ignored.
/// V_{k+1} = V_k + (mu - V_k/gamma) dt + sigma sqrt(dt) Z_k.
SamplePath euler_maruyama_ou(const OuParams& params, double dt, std::size_t n_steps, Rng& rng);
/// Same scheme driven by the given standard normals, one per step.
SamplePath euler_maruyama_ou(const OuParams& params, double dt, std::span<const double> normals);

/// Projected Euler scheme: the Euler proposal V* is kept when V* >= r,
/// otherwise V = r and the local time grows by r - V*. Consumes exactly one
/// normal draw per step, so a free path generated from an equally seeded
/// generator is its matched twin. Throws std::invalid_argument without a
/// boundary.
SamplePath reflected_ou(const OuParams& params, double dt, std::size_t n_steps, Rng& rng);
SamplePath reflected_ou(const OuParams& params, double dt, std::span<const double> normals);

/// Stationary (mean, variance) of the unreflected process: (mu gamma, sigma^2 gamma / 2).
std::pair<double, double> ou_stationary_moments(const OuParams& params);

struct EnsembleRow {
  double t;
  double mean;
  double var;  // sample variance, n - 1 denominator
  double min;
  double max;
  std::size_t n;
};

/// Cross-path statistics every `stride` steps (the last step is always
/// included). Paths must share dt and length.
std::vector<EnsembleRow> ensemble_summary(std::span<const SamplePath> paths, std::size_t stride = 1);

}  // namespace apsim
