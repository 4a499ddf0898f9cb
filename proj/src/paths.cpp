#include "snf/paths.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace snf::paths {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

void check_time(const BrownianApprox& p, double t) {
  if (!(t >= 0.0 && t <= p.horizon))
    throw std::domain_error("paths: t outside [0, T]");
}

// Index k with grid[k] <= t < grid[k+1]; the last interval is closed.
std::size_t segment_of(const std::vector<double>& grid, double t) {
  auto it = std::upper_bound(grid.begin(), grid.end(), t);
  std::size_t k = static_cast<std::size_t>(it - grid.begin());
  if (k > 0) --k;
  if (k >= grid.size() - 1) k = grid.size() - 2;
  return k;
}

}  // namespace

std::vector<double> uniform_grid(std::size_t n, double horizon) {
  if (n < 1 || !(horizon > 0.0)) throw std::invalid_argument("paths: bad grid request");
  std::vector<double> g(n + 1);
  for (std::size_t k = 0; k <= n; ++k) g[k] = horizon * static_cast<double>(k) / static_cast<double>(n);
  g.back() = horizon;
  return g;
}

BrownianApprox sample_kl(std::size_t m, std::size_t n, double horizon, Rng& rng) {
  if (m < 1 || n < 1 || !(horizon > 0.0))
    throw std::invalid_argument("paths: sample_kl requires m >= 1, n >= 1, T > 0");
  BrownianApprox p;
  p.kind = BrownianApprox::Kind::KL;
  p.m = m;
  p.horizon = horizon;
  p.omega = Tensor::matrix(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < n; ++k) p.omega(i, k) = rng.normal();
  return p;
}

BrownianApprox sample_pl(std::size_t m, const std::vector<double>& grid, Rng& rng) {
  if (m < 1 || grid.size() < 2 || grid.front() != 0.0)
    throw std::invalid_argument("paths: PL grid must start at 0 with >= 2 points");
  for (std::size_t k = 0; k + 1 < grid.size(); ++k)
    if (!(grid[k + 1] > grid[k])) throw std::invalid_argument("paths: PL grid must be strictly increasing");
  BrownianApprox p;
  p.kind = BrownianApprox::Kind::PiecewiseLinear;
  p.m = m;
  p.horizon = grid.back();
  p.grid = grid;
  const std::size_t n = grid.size() - 1;
  p.omega = Tensor::matrix(m, n);
  p.knots = Tensor::matrix(m, n + 1);
  for (std::size_t i = 0; i < m; ++i) {
    p.knots(i, 0) = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      p.omega(i, k) = rng.normal();
      p.knots(i, k + 1) = p.knots(i, k) + std::sqrt(grid[k + 1] - grid[k]) * p.omega(i, k);
    }
  }
  return p;
}

std::vector<double> BrownianApprox::eval(double t) const {
  check_time(*this, t);
  std::vector<double> out(m, 0.0);
  if (kind == Kind::KL) {
    const double rt = std::sqrt(horizon);
    const std::size_t n = order();
    for (std::size_t i = 0; i < m; ++i) {
      double acc = omega(i, 0) * t / rt;
      for (std::size_t k = 1; k < n; ++k) {
        const double kpi = static_cast<double>(k) * kPi;
        acc += omega(i, k) * std::sqrt(2.0 * horizon) * std::sin(kpi * t / horizon) / kpi;
      }
      out[i] = acc;
    }
  } else {
    const std::size_t k = segment_of(grid, t);
    const double w = (t - grid[k]) / (grid[k + 1] - grid[k]);
    for (std::size_t i = 0; i < m; ++i)
      out[i] = knots(i, k) + w * (knots(i, k + 1) - knots(i, k));
  }
  return out;
}

std::vector<double> BrownianApprox::deriv(double t) const {
  check_time(*this, t);
  std::vector<double> out(m, 0.0);
  if (kind == Kind::KL) {
    const double rt = std::sqrt(horizon);
    const std::size_t n = order();
    for (std::size_t i = 0; i < m; ++i) {
      double acc = omega(i, 0) / rt;
      for (std::size_t k = 1; k < n; ++k) {
        const double kpi = static_cast<double>(k) * kPi;
        acc += omega(i, k) * std::sqrt(2.0 / horizon) * std::cos(kpi * t / horizon);
      }
      out[i] = acc;
    }
  } else {
    std::size_t k = segment_of(grid, t);
    // right-continuous at interior knots; segment_of already picks the
    // right-hand interval except at t = T where the last slope applies
    for (std::size_t i = 0; i < m; ++i)
      out[i] = (knots(i, k + 1) - knots(i, k)) / (grid[k + 1] - grid[k]);
  }
  return out;
}

HolderEstimate holder_norm(const std::vector<double>& times,
                           const std::vector<std::vector<double>>& values, double alpha) {
  if (times.size() < 2 || times.size() != values.size())
    throw std::invalid_argument("paths: holder_norm needs >= 2 matching samples");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("paths: alpha must be in (0,1)");

  auto norm2 = [](const std::vector<double>& x) {
    double s = 0.0;
    for (double xi : x) s += xi * xi;
    return std::sqrt(s);
  };

  double sup = 0.0;
  for (const auto& x : values) sup = std::max(sup, norm2(x));

  double ratio = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    for (std::size_t j = i + 1; j < times.size(); ++j) {
      if (times[i] == times[j]) continue;
      double inc = 0.0;
      for (std::size_t c = 0; c < values[i].size(); ++c) {
        const double dv = values[j][c] - values[i][c];
        inc += dv * dv;
      }
      ratio = std::max(ratio, std::sqrt(inc) / std::pow(std::abs(times[j] - times[i]), alpha));
    }
  }
  return HolderEstimate{alpha, sup + ratio, times.size()};
}

namespace {

// int_s^t sin(w r) dr, with the w = 0 limit.
double int_sin(double w, double s, double t) {
  if (w == 0.0) return 0.0;
  return (std::cos(w * s) - std::cos(w * t)) / w;
}

// int_s^t r cos(w r) dr.
double int_rcos(double w, double s, double t) {
  if (w == 0.0) return 0.5 * (t * t - s * s);
  auto F = [w](double r) { return r * std::sin(w * r) / w + std::cos(w * r) / (w * w); };
  return F(t) - F(s);
}

// Raw iterated integral int_s^t X_r (dX_r/dr)^T dr for a KL path (signed).
Tensor kl_raw_integral(const BrownianApprox& p, double s, double t) {
  const std::size_t n = p.order();
  const double T = p.horizon;
  const double rt = std::sqrt(T);
  Tensor out = Tensor::matrix(p.m, p.m);

  // X_i(r) = alpha_i r + sum_a beta_ia sin(u_a r)
  // X'_j(r) = alpha_j + sum_b delta_jb cos(u_b r)
  std::vector<double> u(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) u[k] = static_cast<double>(k) * kPi / T;

  const double int_r = 0.5 * (t * t - s * s);
  for (std::size_t i = 0; i < p.m; ++i) {
    const double ai = p.omega(i, 0) / rt;
    for (std::size_t j = 0; j < p.m; ++j) {
      const double aj = p.omega(j, 0) / rt;
      double acc = ai * aj * int_r;
      for (std::size_t b = 1; b < n; ++b) {
        const double djb = p.omega(j, b) * std::sqrt(2.0 / T);
        acc += ai * djb * int_rcos(u[b], s, t);
      }
      for (std::size_t a = 1; a < n; ++a) {
        const double bia = p.omega(i, a) * std::sqrt(2.0 * T) / (static_cast<double>(a) * kPi);
        acc += aj * bia * int_sin(u[a], s, t);
        for (std::size_t b = 1; b < n; ++b) {
          const double djb = p.omega(j, b) * std::sqrt(2.0 / T);
          // sin(ua r) cos(ub r) = [sin((ua+ub) r) + sin((ua-ub) r)] / 2
          acc += bia * djb * 0.5 * (int_sin(u[a] + u[b], s, t) + int_sin(u[a] - u[b], s, t));
        }
      }
      out(i, j) = acc;
    }
  }
  return out;
}

// Same for a PL path: X'_j is constant per segment, so each piece is
// slope_j * (b - a) * X_i((a + b)/2), exact for linear X_i.
Tensor pl_raw_integral(const BrownianApprox& p, double s, double t) {
  const double sign = s <= t ? 1.0 : -1.0;
  const double lo = std::min(s, t), hi = std::max(s, t);
  Tensor out = Tensor::matrix(p.m, p.m);
  const std::size_t nseg = p.grid.size() - 1;
  for (std::size_t k = 0; k < nseg; ++k) {
    const double a = std::max(lo, p.grid[k]);
    const double b = std::min(hi, p.grid[k + 1]);
    if (!(b > a)) continue;
    const double dt = p.grid[k + 1] - p.grid[k];
    const double wmid = (0.5 * (a + b) - p.grid[k]) / dt;
    for (std::size_t i = 0; i < p.m; ++i) {
      const double xi_mid = p.knots(i, k) + wmid * (p.knots(i, k + 1) - p.knots(i, k));
      for (std::size_t j = 0; j < p.m; ++j) {
        const double slope_j = (p.knots(j, k + 1) - p.knots(j, k)) / dt;
        out(i, j) += sign * (b - a) * xi_mid * slope_j;
      }
    }
  }
  return out;
}

}  // namespace

Tensor canonical_lift(const BrownianApprox& path, double s, double t) {
  check_time(path, s);
  check_time(path, t);
  Tensor raw = path.kind == BrownianApprox::Kind::KL ? kl_raw_integral(path, s, t)
                                                     : pl_raw_integral(path, s, t);
  const auto xs = path.eval(s);
  const auto xt = path.eval(t);
  for (std::size_t i = 0; i < path.m; ++i)
    for (std::size_t j = 0; j < path.m; ++j) raw(i, j) -= xs[i] * (xt[j] - xs[j]);
  return raw;
}

Tensor chen_defect(const BrownianApprox& path, double s, double u, double t) {
  if (!(s <= u && u <= t)) throw std::invalid_argument("paths: chen_defect needs s <= u <= t");
  Tensor st = canonical_lift(path, s, t);
  Tensor su = canonical_lift(path, s, u);
  Tensor ut = canonical_lift(path, u, t);
  const auto xs = path.eval(s);
  const auto xu = path.eval(u);
  const auto xt = path.eval(t);
  for (std::size_t i = 0; i < path.m; ++i)
    for (std::size_t j = 0; j < path.m; ++j)
      st(i, j) -= su(i, j) + ut(i, j) + (xu[i] - xs[i]) * (xt[j] - xu[j]);
  return st;
}

Tensor geometric_defect(const BrownianApprox& path, double s, double t) {
  Tensor lift = canonical_lift(path, s, t);
  const auto xs = path.eval(s);
  const auto xt = path.eval(t);
  Tensor out = Tensor::matrix(path.m, path.m);
  for (std::size_t i = 0; i < path.m; ++i)
    for (std::size_t j = 0; j < path.m; ++j)
      out(i, j) = 0.5 * (lift(i, j) + lift(j, i)) - 0.5 * (xt[i] - xs[i]) * (xt[j] - xs[j]);
  return out;
}

}  // namespace snf::paths
