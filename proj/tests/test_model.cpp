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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mfg/coupling.hpp"
#include "mfg/model.hpp"
#include "mfg/rng.hpp"
#include "testutil.hpp"

using namespace mfg;

namespace {

// Grid-search convex conjugate: sup_u (-xi*u - L(x,u,p)), refined around the
// best grid point.  Independent of the closed-form Hamiltonian.
double ConjugateOfLagrangian(const ModelSpec& m, double x, double xi,
                             const Belief& p) {
  double best = -1e300, best_u = 0.0;
  auto scan = [&](double lo, double hi, int n) {
    double h = (hi - lo) / (n - 1);
    for (int k = 0; k < n; ++k) {
      double u = lo + k * h;
      double v = -xi * u - m.Lagrangian(x, u, p);
      if (v > best) {
        best = v;
        best_u = u;
      }
    }
  };
  scan(-20.0, 20.0, 40001);
  scan(best_u - 2e-3, best_u + 2e-3, 20001);
  return best;
}

}  // namespace

TEST_CASE("lagrangian: unit coefficients give |u|^2/4") {
  ModelSpec m = mfgtest::QuadraticModel();
  Belief p = Belief::Make({0.3, 0.7});
  CHECK(m.Lagrangian(0.1, 2.0, p) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("lagrangian: vertex belief selects the single type") {
  ModelSpec m = mfgtest::CongestionModel();
  for (int i = 0; i < 2; ++i) {
    Belief e = Belief::Vertex(i, 2);
    double x = 0.4, u = -1.3;
    double ai = m.a[i].Value(x);
    CHECK(m.Lagrangian(x, u, e) ==
          doctest::Approx(u * u / (4.0 * ai)).epsilon(1e-14));
  }
}

TEST_CASE("legendre transform round trip via grid search") {
  // Single type with a(x) = 1 + 0.5 exp(-x^2): the numeric conjugate of the
  // Lagrangian must recover the closed-form Hamiltonian.
  ModelSpec m = mfgtest::ZeroModel();
  m.a[0] = ScalarField::Parse({"gaussian-bump", "1.0", "0.5", "0.0", "0.7071067811865476"});
  m.a[1] = m.a[0];
  Belief e1 = Belief::Vertex(0, 2);
  double x = 0.3, xi = 1.0;
  double h_grid = ConjugateOfLagrangian(m, x, xi, e1);
  CHECK(h_grid == doctest::Approx(m.Hamiltonian(x, xi, e1)).epsilon(1e-6));
}

TEST_CASE("legendre pair holds for heterogeneous belief mixtures") {
  ModelSpec m = mfgtest::CongestionModel();
  RngStream rng(11);
  for (int rep = 0; rep < 12; ++rep) {
    double x = 4.0 * (rng.NextUniform() - 0.5);
    double xi = 3.0 * (rng.NextUniform() - 0.5);
    double w = rng.NextUniform();
    Belief p = Belief::Make({w, 1.0 - w});
    // Fenchel equality at the optimizer u* = -H_xi.
    double hx = m.HamiltonianGrad(x, xi, p);
    double fenchel = m.Hamiltonian(x, xi, p) + m.Lagrangian(x, -hx, p);
    CHECK(fenchel == doctest::Approx(-xi * (-hx)).epsilon(1e-8));
    // And the grid-search conjugate agrees with the closed form.
    double h_grid = ConjugateOfLagrangian(m, x, xi, p);
    CHECK(h_grid == doctest::Approx(m.Hamiltonian(x, xi, p)).epsilon(1e-6));
  }
}

TEST_CASE("hamiltonian: gradient vanishes at xi=0, matches differences") {
  ModelSpec m = mfgtest::CongestionModel();
  Belief p = Belief::Make({0.25, 0.75});
  CHECK(m.HamiltonianGrad(0.7, 0.0, p) == 0.0);
  RngStream rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    double x = 3.0 * (rng.NextUniform() - 0.5);
    double xi = 2.0 * (rng.NextUniform() - 0.5);
    double h = 1e-4;
    double fd = (m.Hamiltonian(x, xi + h, p) - m.Hamiltonian(x, xi - h, p)) /
                (2.0 * h);
    // H is quadratic in xi, so the central difference is exact to roundoff.
    CHECK(fd == doctest::Approx(m.HamiltonianGrad(x, xi, p)).epsilon(1e-9));
  }
}

TEST_CASE("hamiltonian: uniform belief with equal types is the common value") {
  ModelSpec m = mfgtest::QuadraticModel();  // a_1 = a_2 = 1
  Belief p = Belief::Uniform(2);
  CHECK(m.Hamiltonian(0.2, 1.5, p) ==
        doctest::Approx(1.5 * 1.5).epsilon(1e-14));
  // With shared coefficients the mixture is linear in p as well.
  Belief q = Belief::Make({0.3, 0.7});
  double mix = q[0] * m.Hamiltonian(0.2, 1.5, Belief::Vertex(0, 2)) +
               q[1] * m.Hamiltonian(0.2, 1.5, Belief::Vertex(1, 2));
  CHECK(m.Hamiltonian(0.2, 1.5, q) == doctest::Approx(mix).epsilon(1e-14));
}

TEST_CASE("mixture linearity of the lagrangian and coercivity bracket") {
  ModelSpec m = mfgtest::CongestionModel();
  RngStream rng(17);
  for (int rep = 0; rep < 10; ++rep) {
    double x = 4.0 * (rng.NextUniform() - 0.5);
    double u = 3.0 * (rng.NextUniform() - 0.5);
    double w = rng.NextUniform();
    Belief p = Belief::Make({w, 1.0 - w});
    double mix = w * m.Lagrangian(x, u, Belief::Vertex(0, 2)) +
                 (1.0 - w) * m.Lagrangian(x, u, Belief::Vertex(1, 2));
    CHECK(m.Lagrangian(x, u, p) == doctest::Approx(mix).epsilon(1e-13));
    // Coercivity: C^{-1} |xi|^2 - C <= H <= C xi^2 with C from the a-bounds.
    double xi = 3.0 * (rng.NextUniform() - 0.5);
    double lo = 1.0, hi = 1.4;  // bounds of the a-range for this instance
    double h = m.Hamiltonian(x, xi, p);
    CHECK(h >= lo * xi * xi - 1e-12);
    CHECK(h <= hi * xi * xi + 1e-12);
  }
}

TEST_CASE("coupling: identity profile reduces to a double mollification") {
  Grid1D g = mfgtest::CoarseGrid();
  ModelSpec m = mfgtest::ZeroModel();
  m.f[0] = CouplingProfile::Parse({"linear", "1.0", "0.0"});
  m.f[1] = m.f[0];
  MollifierStencil k = MollifierStencil::Make(g, m.kernel_sigma);
  RngStream rng(23);
  std::vector<double> dens = mfgtest::RandomDensity(g, rng);
  Belief p = Belief::Make({0.5, 0.5});
  std::vector<double> field = CouplingField(m, g, k, dens, p, false);
  // Oracle: single convolution against the analytically composed kernel
  // rho * rho (a Gaussian with variance 2 sigma^2).
  double s2 = std::sqrt(2.0) * m.kernel_sigma;
  for (int i = 40; i < g.nx - 40; i += 7) {
    double acc = 0.0;
    for (int j = 0; j < g.nx; ++j) {
      double r = g.x[i] - g.x[j];
      double w = (j == 0 || j == g.nx - 1) ? 0.5 * g.dx : g.dx;
      acc += std::exp(-0.5 * r * r / (s2 * s2)) /
             (s2 * std::sqrt(2.0 * M_PI)) * dens[j] * w;
    }
    CHECK(field[i] == doctest::Approx(acc).epsilon(1e-8));
  }
}

TEST_CASE("coupling: identical densities give a vanishing pairing") {
  Grid1D g = mfgtest::CoarseGrid();
  ModelSpec m = mfgtest::CongestionModel();
  MollifierStencil k = MollifierStencil::Make(g, m.kernel_sigma);
  RngStream rng(29);
  std::vector<double> dens = mfgtest::RandomDensity(g, rng);
  Belief p = Belief::Make({0.4, 0.6});
  std::vector<double> f1 = CouplingField(m, g, k, dens, p, false);
  std::vector<double> f2 = CouplingField(m, g, k, dens, p, false);
  double pairing = 0.0;
  for (int j = 0; j < g.nx; ++j) {
    double w = (j == 0 || j == g.nx - 1) ? 0.5 * g.dx : g.dx;
    pairing += (f1[j] - f2[j]) * (dens[j] - dens[j]) * w;
  }
  CHECK(pairing == 0.0);
}

TEST_CASE("coupling: strong monotonicity with the certified alpha") {
  Grid1D g = mfgtest::CoarseGrid();
  for (auto model : {mfgtest::QuadraticModel(), mfgtest::CongestionModel()}) {
    MollifierStencil k = MollifierStencil::Make(g, model.kernel_sigma);
    double alpha = model.MonotonicityAlpha();
    CHECK(alpha > 0.0);
    RngStream rng(31);
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<double> m1 = mfgtest::RandomDensity(g, rng);
      std::vector<double> m2 = mfgtest::RandomDensity(g, rng);
      double w = rng.NextUniform();
      Belief p = Belief::Make({w, 1.0 - w});
      for (bool terminal : {false, true}) {
        std::vector<double> k1 = CouplingField(model, g, k, m1, p, terminal);
        std::vector<double> k2 = CouplingField(model, g, k, m2, p, terminal);
        double pairing = 0.0, l2 = 0.0;
        for (int j = 0; j < g.nx; ++j) {
          double wq = (j == 0 || j == g.nx - 1) ? 0.5 * g.dx : g.dx;
          pairing += (k1[j] - k2[j]) * (m1[j] - m2[j]) * wq;
          l2 += (k1[j] - k2[j]) * (k1[j] - k2[j]) * wq;
        }
        CHECK(pairing >= -1e-12);
        CHECK(pairing >= alpha * l2 - 1e-12);
      }
    }
  }
}

TEST_CASE("coupling: negative densities beyond the tolerance are rejected") {
  Grid1D g = mfgtest::CoarseGrid();
  ModelSpec m = mfgtest::QuadraticModel();
  MollifierStencil k = MollifierStencil::Make(g, m.kernel_sigma);
  std::vector<double> dens(g.nx, 0.0);
  dens[g.nx / 2] = 1.0 / g.dx;
  dens[10] = -1e-3;
  CHECK_THROWS(CouplingField(m, g, k, dens, Belief::Uniform(2), false));
}

TEST_CASE("bar major cost: constants, vertex parabola, mixtures") {
  ModelSpec m = mfgtest::QuadraticModel();
  MeasureSummary ms{0.0};

  SUBCASE("constant cost is its own minimum") {
    ModelSpec z = mfgtest::ZeroModel();
    z.l0[0] = MajorCost::Parse({"constant", "3.25"});
    z.l0[1] = z.l0[0];
    auto [val, arg] = z.BarMajorCost(0.0, ms, Belief::Uniform(2));
    CHECK(val == doctest::Approx(3.25).epsilon(1e-14));
  }

  SUBCASE("vertex belief: interior parabola vertex") {
    ModelSpec q = mfgtest::QuadraticModel();
    q.l0[0] = MajorCost::Parse({"quadratic", "0.4"});
    auto [val, arg] = q.BarMajorCost(0.0, ms, Belief::Vertex(0, 2));
    CHECK(arg == doctest::Approx(0.4).epsilon(1e-6));
    CHECK(val == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("two-parabola mixture: argmin at the weighted center") {
    Belief p = Belief::Make({0.3, 0.7});
    // min over [0,1] of 0.3 u^2 + 0.7 (u-1)^2 is at u = 0.7.
    auto [val, arg] = m.BarMajorCost(0.0, ms, p);
    CHECK(arg == doctest::Approx(0.7).epsilon(1e-6));
    CHECK(val == doctest::Approx(0.21).epsilon(1e-9));
    // Dense-grid oracle.
    double best = 1e300;
    for (int i = 0; i <= 2000000; ++i) {
      double u = i / 2000000.0;
      best = std::min(best, m.MajorCostValue(0.0, u, ms, p));
    }
    CHECK(val == doctest::Approx(best).epsilon(1e-6));
  }

  SUBCASE("bar value is a lower bound over sampled controls") {
    ModelSpec c = mfgtest::CongestionModel();
    MeasureSummary mc{0.37};
    RngStream rng(41);
    for (int rep = 0; rep < 10; ++rep) {
      double w = rng.NextUniform();
      Belief p = Belief::Make({w, 1.0 - w});
      double bar = c.BarMajorCost(0.3, mc, p).first;
      for (int i = 0; i <= 50; ++i) {
        double u = c.u0_min + (c.u0_max - c.u0_min) * i / 50.0;
        CHECK(bar <= c.MajorCostValue(0.3, u, mc, p) + 1e-12);
      }
    }
  }
}

TEST_CASE("family registry rejects unknown names and bad arity") {
  CHECK_THROWS(ScalarField::Parse({"cubic", "1.0"}));
  CHECK_THROWS(ScalarField::Parse({"constant"}));
  CHECK_THROWS(ScalarField::Parse({"constant", "-1.0"}));
  CHECK_THROWS(CouplingProfile::Parse({"exp", "1.0"}));
  CHECK_THROWS(CouplingProfile::Parse({"linear", "-0.5", "0.0"}));
  CHECK_THROWS(MajorCost::Parse({"cubic", "1.0"}));
  CHECK_THROWS(InitialDensity::Parse({"uniform", "0.0", "1.0"}));
}

TEST_CASE("initial density: normalization and tail mass") {
  Grid1D g = mfgtest::CoarseGrid();
  InitialDensity d = InitialDensity::Parse({"gaussian", "0.0", "0.9"});
  GridDensity gd = d.Sample(g);
  CHECK(Trapz(g, gd.values) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.MassOutside(6.0) < 1e-10);
  InitialDensity mix = InitialDensity::Parse(
      {"gaussian-mixture", "1.0", "-1.0", "0.5", "2.0", "1.0", "0.5"});
  GridDensity gm = mix.Sample(g);
  CHECK(Trapz(g, gm.values) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(TrapzMean(g, gm.values) ==
        doctest::Approx((1.0 * -1.0 + 2.0 * 1.0) / 3.0).epsilon(1e-6));
}
