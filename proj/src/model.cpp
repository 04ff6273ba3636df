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

#include "mfg/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mfg {
namespace {

constexpr double kPi = 3.14159265358979323846;

[[noreturn]] void BadFamily(const std::string& what, const std::string& got,
                            const std::string& known) {
  throw std::invalid_argument(what + ": unknown family '" + got +
                              "' (known: " + known + ")");
}

std::vector<double> ParseParams(const std::vector<std::string>& tokens,
                                std::size_t expected, const std::string& what) {
  if (tokens.size() - 1 != expected) {
    std::ostringstream os;
    os << what << ": family '" << tokens[0] << "' takes " << expected
       << " parameter(s), got " << tokens.size() - 1;
    throw std::invalid_argument(os.str());
  }
  std::vector<double> p;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    p.push_back(std::stod(tokens[i]));
  }
  return p;
}

double GaussPdf(double x, double mean, double std) {
  double z = (x - mean) / std;
  return std::exp(-0.5 * z * z) / (std * std::sqrt(2.0 * kPi));
}

double GaussTail(double z) {  // P(|X| > z) for standard normal
  return std::erfc(z / std::sqrt(2.0));
}

}  // namespace

// ---------------------------------------------------------------------------
// ScalarField

ScalarField ScalarField::Parse(const std::vector<std::string>& tokens) {
  if (tokens.empty()) throw std::invalid_argument("ScalarField: empty spec");
  ScalarField s;
  if (tokens[0] == "constant") {
    s.family = Family::kConstant;
    s.params = ParseParams(tokens, 1, "ScalarField");
  } else if (tokens[0] == "gaussian-bump") {
    s.family = Family::kGaussianBump;
    s.params = ParseParams(tokens, 4, "ScalarField");
  } else {
    BadFamily("ScalarField", tokens[0], "constant, gaussian-bump");
  }
  if (s.MinValue() <= 0.0) {
    throw std::invalid_argument("ScalarField: must be positive everywhere");
  }
  return s;
}

double ScalarField::Value(double x) const {
  switch (family) {
    case Family::kConstant:
      return params[0];
    case Family::kGaussianBump: {
      double z = (x - params[2]) / params[3];
      return params[0] + params[1] * std::exp(-0.5 * z * z);
    }
  }
  return 0.0;
}

double ScalarField::MinValue() const {
  if (family == Family::kConstant) return params[0];
  return std::min(params[0], params[0] + params[1]);
}

double ScalarField::MaxValue() const {
  if (family == Family::kConstant) return params[0];
  return std::max(params[0], params[0] + params[1]);
}

// ---------------------------------------------------------------------------
// CouplingProfile

CouplingProfile CouplingProfile::Parse(const std::vector<std::string>& tokens) {
  if (tokens.empty()) throw std::invalid_argument("CouplingProfile: empty");
  CouplingProfile c;
  if (tokens[0] == "none") {
    c.family = Family::kNone;
    c.params = ParseParams(tokens, 0, "CouplingProfile");
  } else if (tokens[0] == "linear") {
    c.family = Family::kLinear;
    c.params = ParseParams(tokens, 2, "CouplingProfile");
  } else if (tokens[0] == "tanh") {
    c.family = Family::kTanh;
    c.params = ParseParams(tokens, 3, "CouplingProfile");
  } else if (tokens[0] == "linear-well") {
    c.family = Family::kLinearWell;
    c.params = ParseParams(tokens, 5, "CouplingProfile");
  } else {
    BadFamily("CouplingProfile", tokens[0],
              "none, linear, tanh, linear-well");
  }
  if (!c.IsNone() && (c.SlopeMin() <= 0.0)) {
    throw std::invalid_argument(
        "CouplingProfile: slope in s must be strictly positive");
  }
  return c;
}

double CouplingProfile::Value(double x, double s) const {
  switch (family) {
    case Family::kNone:
      return 0.0;
    case Family::kLinear:
      return params[0] * s + params[1];
    case Family::kTanh:
      return params[0] * s + params[1] * std::tanh(s) + params[2];
    case Family::kLinearWell: {
      double z = (x - params[3]) / params[4];
      return params[0] * s + params[1] - params[2] * std::exp(-0.5 * z * z);
    }
  }
  return 0.0;
}

double CouplingProfile::SlopeMin() const {
  switch (family) {
    case Family::kNone:
      return 0.0;
    case Family::kLinear:
    case Family::kLinearWell:
      return params[0];
    case Family::kTanh:
      return params[0];  // tanh' -> 0 at infinity
  }
  return 0.0;
}

double CouplingProfile::SlopeMax() const {
  switch (family) {
    case Family::kNone:
      return 0.0;
    case Family::kLinear:
    case Family::kLinearWell:
      return params[0];
    case Family::kTanh:
      return params[0] + std::max(params[1], 0.0);
  }
  return 0.0;
}

double CouplingProfile::Bound(double x_max, double s_max) const {
  (void)x_max;
  switch (family) {
    case Family::kNone:
      return 0.0;
    case Family::kLinear:
      return std::abs(params[0]) * s_max + std::abs(params[1]);
    case Family::kTanh:
      return std::abs(params[0]) * s_max + std::abs(params[1]) +
             std::abs(params[2]);
    case Family::kLinearWell:
      return std::abs(params[0]) * s_max + std::abs(params[1]) +
             std::abs(params[2]);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// MajorCost

MajorCost MajorCost::Parse(const std::vector<std::string>& tokens) {
  if (tokens.empty()) throw std::invalid_argument("MajorCost: empty spec");
  MajorCost m;
  if (tokens[0] == "constant") {
    m.family = Family::kConstant;
    m.params = ParseParams(tokens, 1, "MajorCost");
  } else if (tokens[0] == "quadratic") {
    m.family = Family::kQuadratic;
    m.params = ParseParams(tokens, 1, "MajorCost");
  } else if (tokens[0] == "tracking") {
    m.family = Family::kTracking;
    m.params = ParseParams(tokens, 3, "MajorCost");
  } else {
    BadFamily("MajorCost", tokens[0], "constant, quadratic, tracking");
  }
  return m;
}

double MajorCost::Value(double t, double u0, const MeasureSummary& m) const {
  (void)t;
  switch (family) {
    case Family::kConstant:
      return params[0];
    case Family::kQuadratic: {
      double d = u0 - params[0];
      return d * d;
    }
    case Family::kTracking: {
      double d = u0 - m.mean - params[1];
      return params[0] * d * d + params[2] * u0 * u0;
    }
  }
  return 0.0;
}

double MajorCost::Bound(double u0_min, double u0_max,
                        double mean_bound) const {
  double umax = std::max(std::abs(u0_min), std::abs(u0_max));
  switch (family) {
    case Family::kConstant:
      return std::abs(params[0]);
    case Family::kQuadratic: {
      double d = umax + std::abs(params[0]);
      return d * d;
    }
    case Family::kTracking: {
      double d = umax + mean_bound + std::abs(params[1]);
      return params[0] * d * d + params[2] * umax * umax;
    }
  }
  return 0.0;
}

double MajorCost::LipMean(double u0_min, double u0_max,
                          double mean_bound) const {
  if (family != Family::kTracking) return 0.0;
  double umax = std::max(std::abs(u0_min), std::abs(u0_max));
  return 2.0 * params[0] * (umax + mean_bound + std::abs(params[1]));
}

// ---------------------------------------------------------------------------
// InitialDensity

InitialDensity InitialDensity::Parse(const std::vector<std::string>& tokens) {
  if (tokens.empty()) throw std::invalid_argument("InitialDensity: empty");
  InitialDensity d;
  if (tokens[0] == "gaussian") {
    d.family = Family::kGaussian;
    d.params = ParseParams(tokens, 2, "InitialDensity");
  } else if (tokens[0] == "gaussian-mixture") {
    d.family = Family::kGaussianMixture;
    d.params = ParseParams(tokens, 6, "InitialDensity");
  } else {
    BadFamily("InitialDensity", tokens[0], "gaussian, gaussian-mixture");
  }
  return d;
}

double InitialDensity::Value(double x) const {
  if (family == Family::kGaussian) {
    return GaussPdf(x, params[0], params[1]);
  }
  double w1 = params[0], w2 = params[3];
  double z = w1 + w2;
  return (w1 / z) * GaussPdf(x, params[1], params[2]) +
         (w2 / z) * GaussPdf(x, params[4], params[5]);
}

GridDensity InitialDensity::Sample(const Grid1D& g) const {
  std::vector<double> v(g.nx);
  for (int j = 0; j < g.nx; ++j) v[j] = Value(g.x[j]);
  return GridDensity::Normalized(g, std::move(v));
}

double InitialDensity::MassOutside(double x_max) const {
  if (family == Family::kGaussian) {
    double zl = (x_max + params[0]) / params[1];
    double zr = (x_max - params[0]) / params[1];
    return 0.5 * (GaussTail(zl) + GaussTail(zr));
  }
  double w1 = params[0], w2 = params[3];
  double z = w1 + w2;
  InitialDensity g1{Family::kGaussian, {params[1], params[2]}};
  InitialDensity g2{Family::kGaussian, {params[4], params[5]}};
  return (w1 / z) * g1.MassOutside(x_max) + (w2 / z) * g2.MassOutside(x_max);
}

// ---------------------------------------------------------------------------
// ModelSpec

void ModelSpec::Validate() const {
  if (num_types < 2) throw std::invalid_argument("model: need >= 2 types");
  if (horizon <= 0.0) throw std::invalid_argument("model: horizon <= 0");
  if (p0.size() != num_types) {
    throw std::invalid_argument("model: p0 size != number of types");
  }
  if (!(u0_max > u0_min)) {
    throw std::invalid_argument("model: control set is a singleton or empty");
  }
  if (kernel_sigma <= 0.0) {
    throw std::invalid_argument("model: kernel bandwidth must be positive");
  }
  auto check_count = [&](std::size_t n, const std::string& what) {
    if (n != static_cast<std::size_t>(num_types)) {
      throw std::invalid_argument("model: " + what + " needs one entry per type");
    }
  };
  check_count(a.size(), "a");
  check_count(f.size(), "f");
  check_count(g.size(), "g");
  check_count(l0.size(), "l0");
  for (const auto& ai : a) {
    if (ai.MinValue() <= 0.0) {
      throw std::invalid_argument("model: inf_x a_i(x) must be positive");
    }
  }
  for (const auto& fi : f) {
    if (!fi.IsNone() && fi.SlopeMin() <= 0.0) {
      throw std::invalid_argument("model: f_i must be strictly increasing");
    }
  }
  for (const auto& gi : g) {
    if (!gi.IsNone() && gi.SlopeMin() <= 0.0) {
      throw std::invalid_argument("model: g_i must be strictly increasing");
    }
  }
}

double ModelSpec::MonotonicityAlpha() const {
  double alpha = 1.0;
  bool any = false;
  for (const auto& list : {f, g}) {
    for (const auto& c : list) {
      if (c.IsNone()) continue;
      any = true;
      alpha = std::min(alpha, 1.0 / c.SlopeMax());
      alpha = std::min(alpha, c.SlopeMin());
    }
  }
  return any ? alpha : 1.0;
}

double ModelSpec::EffectiveCoeff(double x, const Belief& p) const {
  double inv = 0.0;
  for (int i = 0; i < num_types; ++i) {
    inv += p[i] / a[i].Value(x);
  }
  return 1.0 / inv;
}

double ModelSpec::Lagrangian(double x, double u, const Belief& p) const {
  return u * u / (4.0 * EffectiveCoeff(x, p));
}

double ModelSpec::Hamiltonian(double x, double xi, const Belief& p) const {
  return EffectiveCoeff(x, p) * xi * xi;
}

double ModelSpec::HamiltonianGrad(double x, double xi, const Belief& p) const {
  return 2.0 * EffectiveCoeff(x, p) * xi;
}

double ModelSpec::MajorCostValue(double t, double u0, const MeasureSummary& m,
                                 const Belief& p) const {
  double v = 0.0;
  for (int i = 0; i < num_types; ++i) {
    if (p[i] != 0.0) v += p[i] * l0[i].Value(t, u0, m);
  }
  return v;
}

std::pair<double, double> ModelSpec::BarMajorCost(double t,
                                                  const MeasureSummary& m,
                                                  const Belief& p, int n_scan,
                                                  double u_tol) const {
  auto cost = [&](double u) { return MajorCostValue(t, u, m, p); };
  int best = 0;
  double best_val = cost(u0_min);
  double step = (u0_max - u0_min) / (n_scan - 1);
  for (int k = 1; k < n_scan; ++k) {
    double v = cost(u0_min + k * step);
    if (v < best_val) {
      best_val = v;
      best = k;
    }
  }
  // Golden-section refinement on the bracketing interval.
  double lo = u0_min + std::max(best - 1, 0) * step;
  double hi = u0_min + std::min(best + 1, n_scan - 1) * step;
  const double inv_phi = 0.6180339887498949;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = cost(x1), f2 = cost(x2);
  while (hi - lo > u_tol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = cost(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = cost(x2);
    }
  }
  double u_star = 0.5 * (lo + hi);
  double v_star = cost(u_star);
  if (best_val < v_star) {  // scan minimum was at an untouched endpoint
    v_star = best_val;
    u_star = u0_min + best * step;
  }
  return {v_star, u_star};
}

double ModelSpec::L0Bound(double mean_bound) const {
  double b = 0.0;
  for (const auto& c : l0) {
    b = std::max(b, c.Bound(u0_min, u0_max, mean_bound));
  }
  return b;
}

double ModelSpec::L0LipMean(double mean_bound) const {
  double b = 0.0;
  for (const auto& c : l0) {
    b = std::max(b, c.LipMean(u0_min, u0_max, mean_bound));
  }
  return b;
}

}  // namespace mfg
