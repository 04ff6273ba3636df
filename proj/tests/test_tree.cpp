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

#include "mfg/rng.hpp"
#include "mfg/tree.hpp"

using namespace mfg;

namespace {

// Constraint-projection oracle: draws random posteriors for all children but
// the last, random weights, and solves the last posterior from the martingale
// constraint.  Returns false if the draw is infeasible.
bool RandomSplit(RngStream& rng, const RevelationTree& tree, int node,
                 RevelationTree* out) {
  const Belief& parent = tree.nodes[node].belief;
  const int types = parent.size();
  const int branches = 2 + rng.NextIndex(2);
  std::vector<double> w(branches);
  double wsum = 0.0;
  for (double& v : w) {
    v = 0.2 + rng.NextUniform();
    wsum += v;
  }
  for (double& v : w) v /= wsum;
  std::vector<Belief> posts;
  std::vector<double> last(parent.weights());
  for (int c = 0; c + 1 < branches; ++c) {
    std::vector<double> q(types);
    double qs = 0.0;
    for (int i = 0; i < types; ++i) {
      // Perturb around the parent to keep the recovered posterior feasible.
      q[i] = std::max(parent[i] * (0.5 + rng.NextUniform()), 1e-6);
      qs += q[i];
    }
    for (double& v : q) v /= qs;
    for (int i = 0; i < types; ++i) last[i] -= w[c] * q[i];
    posts.push_back(Belief::Make(std::move(q)));
  }
  double ls = 0.0;
  for (double& v : last) {
    v /= w[branches - 1];
    if (v < 0.0) return false;
    ls += v;
  }
  for (double& v : last) v /= ls;
  posts.push_back(Belief::Make(std::move(last)));
  *out = AddSplit(tree, node, posts, w);
  return true;
}

}  // namespace

TEST_CASE("validate: full-revelation split is ok") {
  RevelationTree t = FullReveal(Belief::Make({0.5, 0.5}), 1.0, 0.25);
  TreeValidation v = Validate(t);
  CHECK(v.ok);
}

TEST_CASE("validate: miscalibrated weights report the martingale residual") {
  RevelationTree t =
      RevelationTree::Root(Belief::Make({0.5, 0.5}), 1.0, {0.25});
  t.AddChildRaw(0, Belief::Make({1.0, 0.0}), 0.6);
  t.AddChildRaw(0, Belief::Make({0.0, 1.0}), 0.4);
  TreeValidation v = Validate(t);
  REQUIRE_FALSE(v.ok);
  bool found = false;
  for (const TreeViolation& viol : v.violations) {
    if (viol.constraint.find("martingale") != std::string::npos) {
      found = true;
      CHECK(viol.node == 0);
      REQUIRE(viol.residual.size() == 2);
      CHECK(viol.residual[0] == doctest::Approx(0.1).epsilon(1e-12));
      CHECK(viol.residual[1] == doctest::Approx(-0.1).epsilon(1e-12));
    }
  }
  CHECK(found);
}

TEST_CASE("random projected splits validate across two stages") {
  RngStream rng(3);
  int built = 0;
  for (int rep = 0; rep < 50 && built < 10; ++rep) {
    RevelationTree t = RevelationTree::Root(
        Belief::Make({0.3, 0.45, 0.25}), 1.0, {0.25, 0.5});
    RevelationTree stage1;
    if (!RandomSplit(rng, t, 0, &stage1)) continue;
    bool ok = true;
    RevelationTree full = stage1;
    for (int node : stage1.NodesAtStage(1)) {
      RevelationTree next;
      if (!RandomSplit(rng, full, node, &next)) {
        ok = false;
        break;
      }
      full = next;
    }
    if (!ok) continue;
    ++built;
    TreeValidation v = Validate(full);
    CHECK(v.ok);
    // Iterated martingale property: leaf-weighted beliefs average to p0.
    std::vector<double> avg(3, 0.0);
    double psum = 0.0;
    for (const BeliefPath& path : EnumeratePaths(full)) {
      psum += path.probability;
      const Belief& leaf = full.nodes[path.node_ids.back()].belief;
      for (int i = 0; i < 3; ++i) avg[i] += path.probability * leaf[i];
    }
    CHECK(psum == doctest::Approx(1.0).epsilon(1e-10));
    for (int i = 0; i < 3; ++i) {
      CHECK(avg[i] == doctest::Approx(full.p0()[i]).epsilon(1e-9));
    }
  }
  CHECK(built == 10);
}

TEST_CASE("no_reveal and full_reveal canonical trees") {
  Belief p0 = Belief::Make({0.3, 0.7});
  RevelationTree nr = NoReveal(p0, 1.0);
  CHECK(nr.nodes.size() == 1);
  CHECK(nr.num_stages() == 0);
  auto paths = EnumeratePaths(nr);
  REQUIRE(paths.size() == 1);
  CHECK(paths[0].probability == 1.0);

  RevelationTree fr = FullReveal(p0, 1.0, 0.0);
  REQUIRE(fr.nodes.size() == 3);
  CHECK(fr.nodes[1].belief == Belief::Vertex(0, 2));
  CHECK(fr.nodes[1].weight == 0.3);
  CHECK(fr.nodes[2].weight == 0.7);
  CHECK(Validate(fr).ok);
}

TEST_CASE("add_split solves the weights from the martingale constraint") {
  RevelationTree t =
      RevelationTree::Root(Belief::Make({0.5, 0.5}), 1.0, {0.25});
  std::vector<Belief> posts{Belief::Make({0.9, 0.1}),
                            Belief::Make({0.1, 0.9})};
  RevelationTree split = AddSplit(t, 0, posts);
  REQUIRE(split.nodes.size() == 3);
  CHECK(split.nodes[1].weight == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(split.nodes[2].weight == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(Validate(split).ok);
}

TEST_CASE("add_split rejects constraint violations") {
  RevelationTree t =
      RevelationTree::Root(Belief::Make({0.5, 0.5}), 1.0, {0.25});
  std::vector<Belief> posts{Belief::Make({0.9, 0.1}),
                            Belief::Make({0.1, 0.9})};
  CHECK_THROWS(AddSplit(t, 0, posts, {0.6, 0.4}));
  // Both posteriors on the same side of the parent: no valid weights.
  std::vector<Belief> bad{Belief::Make({0.9, 0.1}), Belief::Make({0.8, 0.2})};
  CHECK_THROWS(AddSplit(t, 0, bad));
}

TEST_CASE("full_reveal at zero prior mass drops the vertex") {
  RevelationTree fr = FullReveal(Belief::Make({0.0, 1.0}), 1.0, 0.25);
  CHECK(fr.nodes.size() == 2);
  CHECK(Validate(fr).ok);
}

TEST_CASE("conditional expectation basics") {
  std::vector<std::vector<double>> kids{{1.0, 2.0}, {1.0, 2.0}};
  auto out = ConditionalExpectation(kids, {0.5, 0.5});
  CHECK(out[0] == 1.0);
  CHECK(out[1] == 2.0);

  std::vector<std::vector<double>> kids2{{1.0, 5.0}, {3.0, -1.0}};
  auto first = ConditionalExpectation(kids2, {1.0, 0.0});
  CHECK(first[0] == 1.0);
  CHECK(first[1] == 5.0);

  // Affine fields combine pointwise.
  std::vector<double> a(5), b(5);
  for (int j = 0; j < 5; ++j) {
    a[j] = 2.0 * j + 1.0;
    b[j] = -j + 4.0;
  }
  auto mix = ConditionalExpectation({a, b}, {0.25, 0.75});
  for (int j = 0; j < 5; ++j) {
    CHECK(mix[j] == doctest::Approx(0.25 * a[j] + 0.75 * b[j]));
  }
  CHECK_THROWS(ConditionalExpectation({{1.0}, {1.0, 2.0}}, {0.5, 0.5}));
  CHECK_THROWS(ConditionalExpectation(kids2, {0.7, 0.7}));
}

TEST_CASE("enumerate_paths: probabilities multiply along edges") {
  RevelationTree fr = FullReveal(Belief::Make({0.2, 0.3, 0.5}), 1.0, 0.5);
  auto paths = EnumeratePaths(fr);
  REQUIRE(paths.size() == 3);
  CHECK(paths[0].probability == doctest::Approx(0.2));
  CHECK(paths[1].probability == doctest::Approx(0.3));
  CHECK(paths[2].probability == doctest::Approx(0.5));

  // Two-stage binary tree: four paths, product weights.
  RevelationTree t =
      RevelationTree::Root(Belief::Make({0.5, 0.5}), 1.0, {0.25, 0.5});
  t = AddSplit(t, 0, {Belief::Make({0.8, 0.2}), Belief::Make({0.2, 0.8})});
  for (int node : std::vector<int>{1, 2}) {
    const Belief& b = t.nodes[node].belief;
    double lo = std::max(0.0, 2.0 * b[0] - 1.0), hi = std::min(1.0, 2.0 * b[0]);
    double q0 = 0.5 * (lo + hi) + 0.25 * (hi - lo);
    std::vector<Belief> posts{Belief::Make({q0, 1.0 - q0}),
                              Belief::Make({2.0 * b[0] - q0,
                                            1.0 - (2.0 * b[0] - q0)})};
    t = AddSplit(t, node, posts, {0.5, 0.5});
  }
  auto all = EnumeratePaths(t);
  REQUIRE(all.size() == 4);
  double total = 0.0;
  for (const BeliefPath& p : all) {
    double prod = 1.0;
    for (int id : p.node_ids) prod *= t.nodes[id].weight;
    CHECK(p.probability == doctest::Approx(prod).epsilon(1e-15));
    total += p.probability;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("pass-through padding completes dangling branches") {
  RevelationTree t =
      RevelationTree::Root(Belief::Make({0.5, 0.5}), 1.0, {0.25, 0.5});
  t = AddSplit(t, 0, {Belief::Make({0.9, 0.1}), Belief::Make({0.1, 0.9})});
  CHECK_FALSE(Validate(t).ok);  // leaves not yet at the final stage
  RevelationTree padded = PadPassThrough(t);
  CHECK(Validate(padded).ok);
  for (int leaf : padded.Leaves()) {
    CHECK(padded.nodes[leaf].stage == 2);
  }
}

TEST_CASE("json round trip is exact") {
  RngStream rng(7);
  RevelationTree t = RevelationTree::Root(
      Belief::Make({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}), 0.7, {0.3});
  RevelationTree split;
  while (!RandomSplit(rng, t, 0, &split)) {
  }
  nlohmann::json j = TreeToJson(split);
  std::string text = j.dump();
  RevelationTree back = TreeFromJson(nlohmann::json::parse(text));
  REQUIRE(back.nodes.size() == split.nodes.size());
  CHECK(back.horizon == split.horizon);
  CHECK(back.revelation_times == split.revelation_times);
  for (std::size_t i = 0; i < back.nodes.size(); ++i) {
    CHECK(back.nodes[i].weight == split.nodes[i].weight);  // bitwise
    CHECK(back.nodes[i].belief == split.nodes[i].belief);
    CHECK(back.nodes[i].parent == split.nodes[i].parent);
    CHECK(back.nodes[i].stage == split.nodes[i].stage);
  }
}
