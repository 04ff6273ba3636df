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

#ifndef MFG_MODEL_HPP_
#define MFG_MODEL_HPP_

#include <string>
#include <utility>
#include <vector>

#include "mfg/belief.hpp"
#include "mfg/grid.hpp"

namespace mfg {

// All model functions are picked from small registries of named closed-form
// families with numeric parameters; configurations never embed code.

// Positive bounded coefficient a(x) of a quadratic Hamiltonian a(x)*xi^2.
// Families: "constant c",
//           "gaussian-bump base amp center width".
struct ScalarField {
  enum class Family { kConstant, kGaussianBump };
  Family family = Family::kConstant;
  std::vector<double> params;

  static ScalarField Parse(const std::vector<std::string>& tokens);
  double Value(double x) const;
  double MinValue() const;
  double MaxValue() const;
};

// Profile f(x, s), strictly increasing and Lipschitz in s, used in the
// smoothing coupling K(x, m) = f(., (m * rho)(.)) * rho.
// Families: "none",
//           "linear slope offset",
//           "tanh lin amp offset",
//           "linear-well slope offset amp center width".
struct CouplingProfile {
  enum class Family { kNone, kLinear, kTanh, kLinearWell };
  Family family = Family::kNone;
  std::vector<double> params;

  static CouplingProfile Parse(const std::vector<std::string>& tokens);
  bool IsNone() const { return family == Family::kNone; }
  double Value(double x, double s) const;
  double SlopeMin() const;  // inf_s df/ds
  double SlopeMax() const;  // sup_s df/ds
  // sup over the grid range of |f(x, s)| for s in [0, s_max].
  double Bound(double x_max, double s_max) const;
};

// Reduced description of a population measure: what the major-cost families
// consume.  Works for both grid densities and empirical particle clouds.
struct MeasureSummary {
  double mean = 0.0;
};

// Major player's running cost L0(t, u0, m).
// Families: "constant c",
//           "quadratic c"            -> (u0 - c)^2,
//           "tracking track c effort" -> track*(u0 - mean(m) - c)^2
//                                        + effort*u0^2.
struct MajorCost {
  enum class Family { kConstant, kQuadratic, kTracking };
  Family family = Family::kConstant;
  std::vector<double> params;

  static MajorCost Parse(const std::vector<std::string>& tokens);
  double Value(double t, double u0, const MeasureSummary& m) const;
  bool DependsOnMeasure() const { return family == Family::kTracking; }
  double Bound(double u0_min, double u0_max, double mean_bound) const;
  double LipMean(double u0_min, double u0_max, double mean_bound) const;
};

// Initial density of the small players.
// Families: "gaussian mean std",
//           "gaussian-mixture w1 m1 s1 w2 m2 s2".
struct InitialDensity {
  enum class Family { kGaussian, kGaussianMixture };
  Family family = Family::kGaussian;
  std::vector<double> params;

  static InitialDensity Parse(const std::vector<std::string>& tokens);
  double Value(double x) const;
  GridDensity Sample(const Grid1D& g) const;
  double MassOutside(double x_max) const;
};

// One game instance: per-type Hamiltonian coefficients, coupling profiles,
// major costs, the control set, the prior and the initial density.
struct ModelSpec {
  int num_types = 0;
  double horizon = 0.0;
  Belief p0;
  double u0_min = 0.0, u0_max = 0.0;
  double kernel_sigma = 0.0;
  std::vector<ScalarField> a;
  std::vector<CouplingProfile> f;
  std::vector<CouplingProfile> g;
  std::vector<MajorCost> l0;
  InitialDensity m0;

  // Checks the standing structural conditions that are checkable: positive
  // bounded a_i, slope brackets of f_i/g_i, nondegenerate control set,
  // normalized prior.  Throws std::invalid_argument on violation.
  void Validate() const;

  // Monotonicity constant of the smoothing coupling: the certified alpha in
  //   <K(m1)-K(m2), m1-m2>  >=  alpha * ||K(m1)-K(m2)||_2^2.
  // For a profile with slopes in [lo, hi] the valid constant is 1/hi; the
  // model-wide certificate takes the min over types (and both couplings).
  double MonotonicityAlpha() const;

  // Effective Hamiltonian coefficient of the belief mixture.  The mixed
  // Lagrangian is sum_i p_i u^2/(4 a_i), i.e. u^2/(4 abar) with
  // abar = (sum_i p_i / a_i)^{-1}, and its convex conjugate is abar * xi^2.
  double EffectiveCoeff(double x, const Belief& p) const;

  double Lagrangian(double x, double u, const Belief& p) const;
  double Hamiltonian(double x, double xi, const Belief& p) const;
  double HamiltonianGrad(double x, double xi, const Belief& p) const;

  double MajorCostValue(double t, double u0, const MeasureSummary& m,
                        const Belief& p) const;
  // Minimum of MajorCostValue over the control set: coarse scan with n_scan
  // points refined by golden-section search.  Returns (value, argmin).
  std::pair<double, double> BarMajorCost(double t, const MeasureSummary& m,
                                         const Belief& p, int n_scan = 33,
                                         double u_tol = 1e-9) const;

  double L0Bound(double mean_bound) const;
  double L0LipMean(double mean_bound) const;
};

}  // namespace mfg

#endif  // MFG_MODEL_HPP_
