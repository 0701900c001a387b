#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace cnls {

/// Uniform mesh on [lower, upper] with nodes x_j = lower + j*h for j = 0..J
/// and h = (upper - lower) / (J + 1). The last node stops one step short of
/// `upper`; the homogeneous Neumann closure accounts for the ghost column.
/// The same mesh is used for both axes of the square domain.
struct SpatialGrid {
  double lower = 0.0;
  double upper = 1.0;
  int last_index = 0;  // J
  double step = 0.0;   // h

  double node(int j) const { return lower + step * static_cast<double>(j); }
  int node_count() const { return last_index + 1; }
};

inline SpatialGrid build_grid(double lower, double upper, int j_max) {
  if (!(upper > lower))
    throw std::invalid_argument("build_grid: upper bound must exceed lower bound");
  if (j_max < 2)
    throw std::invalid_argument("build_grid: J must be at least 2, got " + std::to_string(j_max));
  double h = (upper - lower) / static_cast<double>(j_max + 1);
  return SpatialGrid{lower, upper, j_max, h};
}

/// Time levels t_n = start + n*l. `step_count` is the index of the final
/// level a run advances to; the three-level scheme occupies levels n-1, n,
/// n+1, so a freshly bootstrapped state already sits at n = 1.
struct TimeGrid {
  double start = 0.0;
  double step = 0.0;  // l
  int step_count = 0;

  double time(int n) const { return start + step * static_cast<double>(n); }
};

inline TimeGrid build_time_grid(double start, double step, int step_count) {
  if (!(step > 0.0))
    throw std::invalid_argument("build_time_grid: step must be positive");
  if (step_count < 1)
    throw std::invalid_argument("build_time_grid: need at least one step");
  return TimeGrid{start, step, step_count};
}

/// Continuous and scheme parameters shared by every module.
///
/// sigma1, sigma2 scale the two Laplacians, lambda couples the densities,
/// power is the exponent p in |u|^{p-1}. The barycentric weights mu1..mu3
/// blend the three time levels; kappa in {1, 2} selects whether the time
/// difference spans one or two steps of the underlying semi-discretization.
struct SchemeParams {
  double sigma1 = 1.0;
  double sigma2 = 1.0;
  double lambda = 1.0;
  double power = 2.5;
  double mu1 = 0.25;
  double mu2 = 0.5;
  double mu3 = 0.25;
  int kappa = 2;
};

inline void validate_scheme_params(const SchemeParams& p) {
  if (!(p.sigma1 > 0.0) || !(p.sigma2 > 0.0))
    throw std::invalid_argument("scheme params: dispersion coefficients must be positive");
  if (!(p.lambda > 0.0))
    throw std::invalid_argument("scheme params: coupling lambda must be positive");
  if (!(p.power > 1.0))
    throw std::invalid_argument("scheme params: power p must exceed 1");
  for (double mu : {p.mu1, p.mu2, p.mu3}) {
    if (!(mu > 0.0) || !(mu < 1.0))
      throw std::invalid_argument("scheme params: each mu must lie strictly inside (0, 1)");
  }
  if (std::abs(p.mu1 + p.mu2 + p.mu3 - 1.0) > 1e-12)
    throw std::invalid_argument("scheme params: mu1 + mu2 + mu3 must equal 1");
  if (p.kappa != 1 && p.kappa != 2)
    throw std::invalid_argument("scheme params: kappa must be 1 or 2");
}

inline SchemeParams make_scheme_params(double sigma1, double sigma2, double lambda, double power,
                                       double mu1, double mu2, double mu3, int kappa) {
  SchemeParams p{sigma1, sigma2, lambda, power, mu1, mu2, mu3, kappa};
  validate_scheme_params(p);
  return p;
}

/// sigma = l / h^2, the ratio every scheme coefficient is proportional to.
/// Nothing forbids sigma > 1 (the scheme is unconditionally stable for
/// mu2 <= 2*mu1 with mu1 = mu3) but large values degrade accuracy, so the
/// flag lets callers warn.
struct MeshRatio {
  double sigma = 0.0;
  bool large = false;
};

inline MeshRatio validate_step_ratio(const SpatialGrid& grid, const TimeGrid& tgrid) {
  double sigma = tgrid.step / (grid.step * grid.step);
  return MeshRatio{sigma, sigma > 1.0};
}

}  // namespace cnls
