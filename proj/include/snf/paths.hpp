#pragma once

#include <cstddef>
#include <vector>

#include "snf/rng.hpp"
#include "snf/tensor.hpp"

namespace snf::paths {

// Finite-dimensional stand-in for an m-dimensional Brownian sample path on
// [0, T]: either a truncated Karhunen-Loeve series built on the Brownian
// bridge,
//   B_t = w0 t/sqrt(T) + sum_{k=1}^{n-1} w_k sqrt(2T) sin(k pi t/T)/(k pi),
// or exact simulation on a grid followed by linear interpolation. Both
// vanish at t = 0 and are smooth enough to drive an ODE solver.
struct BrownianApprox {
  enum class Kind { KL, PiecewiseLinear };

  Kind kind = Kind::KL;
  std::size_t m = 1;          // noise dimension
  double horizon = 1.0;       // T
  Tensor omega;               // m x n standard-normal draws
  std::vector<double> grid;   // PL only: 0 = t_0 < ... < t_n = T
  Tensor knots;               // PL only: m x (n+1) cumulative values

  std::size_t order() const { return omega.d1; }  // n

  // Path value / time derivative at t in [0, T]. The PL derivative is the
  // piecewise-constant slope, right-continuous at interior knots.
  std::vector<double> eval(double t) const;
  std::vector<double> deriv(double t) const;
};

BrownianApprox sample_kl(std::size_t m, std::size_t n, double horizon, Rng& rng);
BrownianApprox sample_pl(std::size_t m, const std::vector<double>& grid, Rng& rng);

// Uniform PL grid helper: n steps on [0, T].
std::vector<double> uniform_grid(std::size_t n, double horizon);

// Discrete alpha-Hoelder norm estimate over a sample of the path:
// sup_t ||X_t|| + max_{s != t} ||X_t - X_s|| / |t - s|^alpha.
struct HolderEstimate {
  double alpha = 0.5;
  double value = 0.0;
  std::size_t resolution = 0;  // number of sample times used
};

HolderEstimate holder_norm(const std::vector<double>& times,
                           const std::vector<std::vector<double>>& values, double alpha);

// Canonical rough-path lift of the (piecewise) smooth approximation,
//   Lift_{s,t} = int_s^t (X_r - X_s) (dX_r/dr)^T dr,
// in closed form per linear / sinusoidal segment. Reversed s > t gives the
// signed value of the same integral.
Tensor canonical_lift(const BrownianApprox& path, double s, double t);

// Chen consistency of the canonical lift across s <= u <= t:
//   Lift_{s,t} - Lift_{s,u} - Lift_{u,t} - (X_u - X_s)(X_t - X_u)^T,
// zero (to round-off) for canonical lifts.
Tensor chen_defect(const BrownianApprox& path, double s, double u, double t);

// Geometric (symmetry) defect: Sym(Lift_{s,t}) - (X_t - X_s)(X_t - X_s)^T / 2.
Tensor geometric_defect(const BrownianApprox& path, double s, double t);

}  // namespace snf::paths
