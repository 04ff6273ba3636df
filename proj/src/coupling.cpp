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

#include "mfg/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mfg {

MollifierStencil MollifierStencil::Make(const Grid1D& g, double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("mollifier: sigma <= 0");
  MollifierStencil k;
  k.sigma = sigma;
  k.half_width = static_cast<int>(std::ceil(6.0 * sigma / g.dx));
  k.values.resize(2 * k.half_width + 1);
  double raw_mass = 0.0;
  for (int j = -k.half_width; j <= k.half_width; ++j) {
    double r = j * g.dx;
    double v = std::exp(-0.5 * r * r / (sigma * sigma));
    k.values[j + k.half_width] = v;
    raw_mass += v * g.dx;
  }
  k.norm = raw_mass;
  for (double& v : k.values) v /= k.norm;
  return k;
}

double MollifierStencil::At(double r) const {
  if (std::abs(r) > 6.0 * sigma) return 0.0;
  return std::exp(-0.5 * r * r / (sigma * sigma)) / norm;
}

std::vector<double> ConvolveGrid(const Grid1D& g, const MollifierStencil& k,
                                 const std::vector<double>& in) {
  std::vector<double> out(g.nx, 0.0);
  for (int i = 0; i < g.nx; ++i) {
    int lo = std::max(0, i - k.half_width);
    int hi = std::min(g.nx - 1, i + k.half_width);
    double acc = 0.0;
    for (int j = lo; j <= hi; ++j) {
      double w = (j == 0 || j == g.nx - 1) ? 0.5 * g.dx : g.dx;
      acc += k.values[j - i + k.half_width] * in[j] * w;
    }
    out[i] = acc;
  }
  return out;
}

double ConvolveAt(const Grid1D& g, const MollifierStencil& k,
                  const std::vector<double>& in, double xq) {
  int center = static_cast<int>(std::floor((xq - g.x.front()) / g.dx));
  int lo = std::max(0, center - k.half_width);
  int hi = std::min(g.nx - 1, center + 1 + k.half_width);
  double acc = 0.0;
  for (int j = lo; j <= hi; ++j) {
    double w = (j == 0 || j == g.nx - 1) ? 0.5 * g.dx : g.dx;
    acc += k.At(xq - g.x[j]) * in[j] * w;
  }
  return acc;
}

std::vector<double> DepositParticles(const Grid1D& g,
                                     const MollifierStencil& k,
                                     const std::vector<double>& positions) {
  std::vector<double> out(g.nx, 0.0);
  for (double xp : positions) {
    int center = static_cast<int>(std::lround((xp - g.x.front()) / g.dx));
    int lo = std::max(0, center - k.half_width);
    int hi = std::min(g.nx - 1, center + k.half_width);
    for (int j = lo; j <= hi; ++j) {
      out[j] += k.At(g.x[j] - xp);
    }
  }
  double inv_n = 1.0 / static_cast<double>(positions.size());
  for (double& v : out) v *= inv_n;
  return out;
}

namespace {

std::vector<double> InnerSmoothed(const Grid1D& g, const MollifierStencil& k,
                                  const std::vector<double>& density,
                                  double mass_tol) {
  for (double v : density) {
    if (v < -mass_tol) {
      throw std::invalid_argument("coupling: density below -" +
                                  std::to_string(mass_tol));
    }
  }
  std::vector<double> s = ConvolveGrid(g, k, density);
  for (double& v : s) v = std::max(v, 0.0);
  return s;
}

}  // namespace

std::vector<double> CouplingFieldType(const ModelSpec& model, const Grid1D& g,
                                      const MollifierStencil& k,
                                      const std::vector<double>& density,
                                      int type, bool terminal) {
  const CouplingProfile& prof = terminal ? model.g[type] : model.f[type];
  if (prof.IsNone()) return std::vector<double>(g.nx, 0.0);
  std::vector<double> s = InnerSmoothed(g, k, density, 1e-6);
  std::vector<double> t(g.nx);
  for (int j = 0; j < g.nx; ++j) t[j] = prof.Value(g.x[j], s[j]);
  return ConvolveGrid(g, k, t);
}

std::vector<double> CouplingField(const ModelSpec& model, const Grid1D& g,
                                  const MollifierStencil& k,
                                  const std::vector<double>& density,
                                  const Belief& p, bool terminal,
                                  double mass_tol) {
  std::vector<double> s = InnerSmoothed(g, k, density, mass_tol);
  // One outer convolution suffices: mix the profiles first.
  std::vector<double> t(g.nx, 0.0);
  bool all_none = true;
  for (int i = 0; i < model.num_types; ++i) {
    const CouplingProfile& prof = terminal ? model.g[i] : model.f[i];
    if (prof.IsNone() || p[i] == 0.0) continue;
    all_none = false;
    for (int j = 0; j < g.nx; ++j) t[j] += p[i] * prof.Value(g.x[j], s[j]);
  }
  if (all_none) return std::vector<double>(g.nx, 0.0);
  return ConvolveGrid(g, k, t);
}

double CouplingAt(const ModelSpec& model, const Grid1D& g,
                  const MollifierStencil& k, const std::vector<double>& density,
                  const Belief& p, bool terminal, double xq, double mass_tol) {
  std::vector<double> s = InnerSmoothed(g, k, density, mass_tol);
  std::vector<double> t(g.nx, 0.0);
  for (int i = 0; i < model.num_types; ++i) {
    const CouplingProfile& prof = terminal ? model.g[i] : model.f[i];
    if (prof.IsNone() || p[i] == 0.0) continue;
    for (int j = 0; j < g.nx; ++j) t[j] += p[i] * prof.Value(g.x[j], s[j]);
  }
  return ConvolveAt(g, k, t, xq);
}

double CouplingBound(const ModelSpec& model, const Grid1D& g,
                     const MollifierStencil& k, bool terminal) {
  double s_max = k.At(0.0);  // sup of m * rho over probability measures
  double b = 0.0;
  for (int i = 0; i < model.num_types; ++i) {
    const CouplingProfile& prof = terminal ? model.g[i] : model.f[i];
    b = std::max(b, prof.Bound(g.x_max, s_max));
  }
  return b;
}

}  // namespace mfg
