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

#ifndef MFG_COUPLING_HPP_
#define MFG_COUPLING_HPP_

#include <vector>

#include "mfg/grid.hpp"
#include "mfg/model.hpp"

namespace mfg {

// Gaussian mollifier sampled on the grid, truncated at 6 sigma and normalized
// so that the discrete trapezoidal mass of the centered stencil is exactly 1.
// The same normalization constant is reused for off-grid evaluations and for
// particle deposits, keeping all convolution flavours mutually consistent.
struct MollifierStencil {
  double sigma = 0.0;
  int half_width = 0;           // stencil reach in cells
  std::vector<double> values;   // rho(k*dx), k = -half_width..half_width
  double norm = 1.0;            // discrete normalization constant

  static MollifierStencil Make(const Grid1D& g, double sigma);

  // Normalized kernel value at physical offset r (|r| beyond 6 sigma -> 0).
  double At(double r) const;
};

// Discrete convolution (in * rho) at all grid nodes, trapezoidal weights,
// contributions outside the grid dropped.
std::vector<double> ConvolveGrid(const Grid1D& g, const MollifierStencil& k,
                                 const std::vector<double>& in);

// Same quadrature evaluated at an arbitrary point.
double ConvolveAt(const Grid1D& g, const MollifierStencil& k,
                  const std::vector<double>& in, double xq);

// Kernel-density deposit of a particle cloud: s(x_j) = mean_k rho(x_j - X_k).
std::vector<double> DepositParticles(const Grid1D& g,
                                     const MollifierStencil& k,
                                     const std::vector<double>& positions);

// Smoothed coupling of one type: K_i(x, m) = (f_i(., (m*rho)(.)) * rho)(x),
// with the inner convolution clamped below at 0 before applying f_i.
// `inner` may be precomputed (pass nullptr to compute from density).
std::vector<double> CouplingFieldType(const ModelSpec& model, const Grid1D& g,
                                      const MollifierStencil& k,
                                      const std::vector<double>& density,
                                      int type, bool terminal);

// Belief mixture sum_i p_i K_i(x, m) at all grid nodes.  Negative densities
// below -mass_tol are rejected.
std::vector<double> CouplingField(const ModelSpec& model, const Grid1D& g,
                                  const MollifierStencil& k,
                                  const std::vector<double>& density,
                                  const Belief& p, bool terminal,
                                  double mass_tol = 1e-6);

// Point evaluation of the mixture coupling at an arbitrary x.
double CouplingAt(const ModelSpec& model, const Grid1D& g,
                  const MollifierStencil& k, const std::vector<double>& density,
                  const Belief& p, bool terminal, double xq,
                  double mass_tol = 1e-6);

// Uniform bound on |F| / |G| fields used by maximum-principle diagnostics:
// sup_x |f_i(x, s)| over s in [0, sup m*rho] with sup m*rho <= rho(0).
double CouplingBound(const ModelSpec& model, const Grid1D& g,
                     const MollifierStencil& k, bool terminal);

}  // namespace mfg

#endif  // MFG_COUPLING_HPP_
