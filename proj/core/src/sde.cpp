#include "apsim/sde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace apsim {

SkorokhodResult skorokhod_map(std::span<const double> y, double boundary) {
  if (y.empty()) throw std::invalid_argument("skorokhod_map needs a non-empty path");
  if (y[0] < boundary) throw std::invalid_argument("path starts below the reflecting boundary");

  SkorokhodResult out;
  out.reflected.resize(y.size());
  out.regulator.resize(y.size());
  double phi = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double deficit = boundary - y[k];
    if (deficit > phi) {
      phi = deficit;
      out.reflected[k] = boundary;
    } else {
      out.reflected[k] = std::max(boundary, y[k] + phi);
    }
    out.regulator[k] = phi;
  }
  return out;
}

void validate(const OuParams& p) {
  if (!(p.gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (!(p.sigma >= 0.0) || !std::isfinite(p.sigma)) throw std::invalid_argument("sigma must be non-negative");
  if (!std::isfinite(p.mu) || !std::isfinite(p.v0)) throw std::invalid_argument("mu and v0 must be finite");
  if (p.boundary && !(p.v0 >= *p.boundary))
    throw std::invalid_argument("initial value lies below the reflecting boundary");
}

namespace {

void check_grid(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
}

}  // namespace

namespace {

template <typename Noise>
SamplePath integrate_free(const OuParams& params, double dt, std::size_t n_steps, Noise&& z) {
  OuParams free = params;
  free.boundary.reset();
  validate(free);
  check_grid(dt);

  SamplePath path;
  path.dt = dt;
  path.values.resize(n_steps + 1);
  path.local_time.assign(n_steps + 1, 0.0);
  const double noise = params.sigma * std::sqrt(dt);
  double v = params.v0;
  path.values[0] = v;
  for (std::size_t k = 1; k <= n_steps; ++k) {
    v = v + (params.mu - v / params.gamma) * dt + noise * z(k - 1);
    path.values[k] = v;
  }
  return path;
}

template <typename Noise>
SamplePath integrate_reflected(const OuParams& params, double dt, std::size_t n_steps, Noise&& z) {
  if (!params.boundary) throw std::invalid_argument("reflected_ou needs a boundary");
  validate(params);
  check_grid(dt);

  const double r = *params.boundary;
  SamplePath path;
  path.dt = dt;
  path.boundary = r;
  path.values.resize(n_steps + 1);
  path.local_time.resize(n_steps + 1);
  const double noise = params.sigma * std::sqrt(dt);
  double v = params.v0;
  double local = 0.0;
  path.values[0] = v;
  path.local_time[0] = 0.0;
  for (std::size_t k = 1; k <= n_steps; ++k) {
    const double proposal = v + (params.mu - v / params.gamma) * dt + noise * z(k - 1);
    if (proposal >= r) {
      v = proposal;
    } else {
      local += r - proposal;
      v = r;
    }
    path.values[k] = v;
    path.local_time[k] = local;
  }
  return path;
}

}  // namespace

SamplePath euler_maruyama_ou(const OuParams& params, double dt, std::size_t n_steps, Rng& rng) {
  return integrate_free(params, dt, n_steps, [&](std::size_t) { return rng.normal(); });
}

SamplePath euler_maruyama_ou(const OuParams& params, double dt, std::span<const double> normals) {
  return integrate_free(params, dt, normals.size(), [&](std::size_t k) { return normals[k]; });
}

SamplePath reflected_ou(const OuParams& params, double dt, std::size_t n_steps, Rng& rng) {
  return integrate_reflected(params, dt, n_steps, [&](std::size_t) { return rng.normal(); });
}

SamplePath reflected_ou(const OuParams& params, double dt, std::span<const double> normals) {
  return integrate_reflected(params, dt, normals.size(), [&](std::size_t k) { return normals[k]; });
}

std::pair<double, double> ou_stationary_moments(const OuParams& params) {
  if (!(params.gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  return {params.mu * params.gamma, params.sigma * params.sigma * params.gamma / 2.0};
}

std::vector<EnsembleRow> ensemble_summary(std::span<const SamplePath> paths, std::size_t stride) {
  if (paths.empty()) throw std::invalid_argument("empty ensemble");
  if (stride == 0) throw std::invalid_argument("stride must be positive");
  const std::size_t len = paths.front().size();
  const double dt = paths.front().dt;
  for (const auto& p : paths)
    if (p.size() != len || p.dt != dt) throw std::invalid_argument("paths use different grids");

  std::vector<EnsembleRow> rows;
  const auto n = static_cast<double>(paths.size());
  auto emit = [&](std::size_t k) {
    double sum = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& p : paths) {
      sum += p.values[k];
      lo = std::min(lo, p.values[k]);
      hi = std::max(hi, p.values[k]);
    }
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& p : paths) ss += (p.values[k] - mean) * (p.values[k] - mean);
    rows.push_back({paths.front().time(k), mean, paths.size() > 1 ? ss / (n - 1.0) : 0.0, lo, hi,
                    paths.size()});
  };
  for (std::size_t k = 0; k < len; k += stride) emit(k);
  if (len > 0 && (len - 1) % stride != 0) emit(len - 1);
  return rows;
}

}  // namespace apsim
