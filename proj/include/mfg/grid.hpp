// Copyright 2026 The MFGLab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MFG_GRID_HPP_
#define MFG_GRID_HPP_

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfg {

// Uniform space-time grid on [-x_max, x_max] x [0, T].  Space nodes
// x_j = -x_max + j*dx, j = 0..nx-1; time steps t_n = n*dt, n = 0..nt.
// The explicit (Hamiltonian) part of the schemes requires dt <= cfl * dx^2.
struct Grid1D {
  double x_max = 0.0;
  int nx = 0;
  double dx = 0.0;
  double horizon = 0.0;
  int nt = 0;
  double dt = 0.0;
  std::vector<double> x;

  static Grid1D Make(double x_max, int nx, double horizon, int nt,
                     double cfl = 1.0) {
    if (nx < 3 || nt < 1 || x_max <= 0.0 || horizon <= 0.0) {
      throw std::invalid_argument("Grid1D: bad dimensions");
    }
    Grid1D g;
    g.x_max = x_max;
    g.nx = nx;
    g.dx = 2.0 * x_max / (nx - 1);
    g.horizon = horizon;
    g.nt = nt;
    g.dt = horizon / nt;
    if (g.dt > cfl * g.dx * g.dx) {
      throw std::invalid_argument(
          "Grid1D: dt=" + std::to_string(g.dt) + " violates dt <= cfl*dx^2 = " +
          std::to_string(cfl * g.dx * g.dx));
    }
    g.x.resize(nx);
    for (int j = 0; j < nx; ++j) g.x[j] = -x_max + j * g.dx;
    return g;
  }

  // Nearest time-grid index for t; revelation times must land exactly on the
  // grid, so callers check |t - index*dt| afterwards where it matters.
  int SnapTimeIndex(double t) const {
    int n = static_cast<int>(std::lround(t / dt));
    if (n < 0) n = 0;
    if (n > nt) n = nt;
    return n;
  }

  // Clamped linear interpolation of nodal values at an off-grid point.
  double Interpolate(const std::vector<double>& values, double xq) const {
    if (xq <= x.front()) return values.front();
    if (xq >= x.back()) return values.back();
    double s = (xq - x.front()) / dx;
    int j = static_cast<int>(s);
    if (j >= nx - 1) j = nx - 2;
    double frac = s - j;
    return values[j] * (1.0 - frac) + values[j + 1] * frac;
  }
};

inline double Trapz(const Grid1D& g, const std::vector<double>& v) {
  double s = 0.5 * (v.front() + v.back());
  for (int j = 1; j + 1 < g.nx; ++j) s += v[j];
  return s * g.dx;
}

inline double TrapzMean(const Grid1D& g, const std::vector<double>& density) {
  double s = 0.5 * (g.x.front() * density.front() + g.x.back() * density.back());
  for (int j = 1; j + 1 < g.nx; ++j) s += g.x[j] * density[j];
  return s * g.dx;
}

// Probability density sampled on the grid nodes; trapezoidal mass 1 within
// the solver mass tolerance.
struct GridDensity {
  std::vector<double> values;

  static GridDensity Normalized(const Grid1D& g, std::vector<double> v) {
    GridDensity d;
    d.values = std::move(v);
    double mass = Trapz(g, d.values);
    if (!(mass > 0.0)) throw std::invalid_argument("GridDensity: zero mass");
    for (double& m : d.values) m /= mass;
    return d;
  }
};

// Thomas algorithm for a tridiagonal system (lower, diag, upper), in-place
// on rhs.  diag is consumed.
inline void SolveTridiagonal(std::vector<double>& lower,
                             std::vector<double>& diag,
                             std::vector<double>& upper,
                             std::vector<double>& rhs) {
  const int n = static_cast<int>(diag.size());
  for (int i = 1; i < n; ++i) {
    double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (int i = n - 2; i >= 0; --i) {
    rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
  }
}

// Applies one implicit diffusion step with homogeneous Neumann boundary:
// solves (I - dt*Lap_h) out = in, where Lap_h is the symmetric Neumann
// Laplacian.  Column sums of the system matrix are 1, so the plain nodal sum
// of `in` is conserved exactly (up to roundoff).
inline void ImplicitDiffusionStep(const Grid1D& g, double dt,
                                  std::vector<double>& values) {
  const int n = g.nx;
  const double r = dt / (g.dx * g.dx);
  std::vector<double> lower(n, -r), diag(n, 1.0 + 2.0 * r), upper(n, -r);
  diag[0] = 1.0 + r;
  diag[n - 1] = 1.0 + r;
  lower[0] = 0.0;
  upper[n - 1] = 0.0;
  SolveTridiagonal(lower, diag, upper, values);
}

}  // namespace mfg

#endif  // MFG_GRID_HPP_
