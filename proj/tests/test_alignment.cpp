#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "cu3d/alignment.hpp"
#include "support/generators.hpp"

using namespace cu3d;

namespace {

/// One-hot prediction matching the label map exactly.
ProbabilityMap one_hot(const InstanceMap& label, int slots) {
  ProbabilityMap pred(label.height, label.width, slots);
  for (int v = 0; v < label.height; ++v)
    for (int u = 0; u < label.width; ++u) pred.at(v, u, label.at(v, u)) = 1.0f;
  return pred;
}

double assignment_cost(const CostMatrix& cost, const std::vector<int>& rows) {
  double total = 0;
  for (int c = 0; c < cost.cols; ++c) total += cost.at(rows[c], c);
  return total;
}

/// Exhaustive minimum over all injective column->row assignments.
double brute_force_min_cost(const CostMatrix& cost) {
  std::vector<int> rows(cost.rows);
  std::iota(rows.begin(), rows.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0;
    for (int c = 0; c < cost.cols; ++c) total += cost.at(rows[c], c);
    best = std::min(best, total);
  } while (std::next_permutation(rows.begin(), rows.end()));
  return best;
}

CostMatrix random_cost(std::mt19937_64& rng, int rows, int cols) {
  CostMatrix cost(rows, cols);
  // dyadic values keep every sum exactly representable
  for (double& v : cost.values) v = static_cast<double>(static_cast<long long>(rng() % 3201) - 1600) / 16.0;
  return cost;
}

}  // namespace

TEST_CASE("siou_cost: perfect overlap scores -1, disjoint scores 0") {
  InstanceMap label(3, 3, 0);
  label.at(0, 0) = 1;
  label.at(0, 1) = 1;
  label.at(2, 2) = 2;
  const auto cost = siou_cost(one_hot(label, 4), label);
  REQUIRE(cost.rows == 3);
  REQUIRE(cost.cols == 2);
  CHECK(cost.at(0, 0) == doctest::Approx(-1.0));  // slot 1 vs label 1
  CHECK(cost.at(1, 1) == doctest::Approx(-1.0));  // slot 2 vs label 2
  CHECK(cost.at(0, 1) == doctest::Approx(0.0));   // disjoint
  CHECK(cost.at(2, 0) == doctest::Approx(0.0));   // empty slot vs mask -> 0/size
}

TEST_CASE("siou_cost: absent label id against an all-zero slot is 0, not NaN") {
  InstanceMap label(2, 2, 0);
  label.at(0, 0) = 2;  // id 1 never appears: column 0 is an empty mask
  ProbabilityMap pred(2, 2, 3);
  const auto cost = siou_cost(pred, label);
  CHECK(cost.at(0, 0) == 0.0);
  CHECK(cost.at(1, 0) == 0.0);
  CHECK(std::isfinite(cost.at(0, 1)));
}

TEST_CASE("siou_cost: half-confidence prediction scores -0.5") {
  InstanceMap label(3, 3, 0);
  label.at(1, 0) = 1;
  label.at(1, 1) = 1;
  label.at(1, 2) = 1;
  label.at(2, 2) = 1;
  ProbabilityMap pred(3, 3, 2);
  for (int v = 0; v < 3; ++v)
    for (int u = 0; u < 3; ++u)
      if (label.at(v, u) == 1) pred.at(v, u, 1) = 0.5f;
  // -(0.5 k) / (0.5 k + k - 0.5 k) = -0.5 for any mask size k
  CHECK(siou_cost(pred, label).at(0, 0) == doctest::Approx(-0.5));
}

TEST_CASE("siou_cost: random case matches per-pixel summation") {
  std::mt19937_64 rng(5);
  InstanceMap label(4, 4, 0);
  for (auto& px : label.pixels) px = static_cast<std::int32_t>(rng() % 3);
  ProbabilityMap pred(4, 4, 3);
  for (auto& v : pred.values) v = static_cast<float>(gen::uniform(rng, 0.0, 1.0));

  const auto cost = siou_cost(pred, label);
  for (int slot = 1; slot <= 2; ++slot) {
    for (int t = 1; t <= cost.cols; ++t) {
      double inter = 0, sum_y = 0, sum_m = 0;
      for (int v = 0; v < 4; ++v)
        for (int u = 0; u < 4; ++u) {
          const double y = pred.at(v, u, slot);
          const double m = label.at(v, u) == t ? 1.0 : 0.0;
          inter += y * m;
          sum_y += y;
          sum_m += m;
        }
      const double expected = (sum_y + sum_m - inter) == 0 ? 0 : -inter / (sum_y + sum_m - inter);
      CHECK(cost.at(slot - 1, t - 1) == doctest::Approx(expected).epsilon(1e-9));
      CHECK(cost.at(slot - 1, t - 1) <= 0.0);
      CHECK(cost.at(slot - 1, t - 1) >= -1.0);
    }
  }
}

TEST_CASE("ce_cost: exact prediction costs ~0, uniform prediction costs log 2") {
  InstanceMap label(3, 3, 0);
  label.at(0, 0) = 1;
  label.at(1, 1) = 2;
  const auto exact = ce_cost(one_hot(label, 3), label);
  CHECK(exact.at(0, 0) < 1e-6);
  CHECK(exact.at(1, 1) < 1e-6);

  ProbabilityMap uniform(3, 3, 3);
  for (auto& v : uniform.values) v = 0.5f;
  const auto cost = ce_cost(uniform, label);
  for (int r = 0; r < cost.rows; ++r)
    for (int c = 0; c < cost.cols; ++c)
      CHECK(cost.at(r, c) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("ce_cost: random case matches the scalar loop") {
  std::mt19937_64 rng(6);
  InstanceMap label(4, 4, 0);
  for (auto& px : label.pixels) px = static_cast<std::int32_t>(rng() % 3);
  ProbabilityMap pred(4, 4, 3);
  for (auto& v : pred.values) v = static_cast<float>(gen::uniform(rng, 0.0, 1.0));

  const auto cost = ce_cost(pred, label);
  const double eps = 1e-7;
  for (int slot = 1; slot <= 2; ++slot)
    for (int t = 1; t <= cost.cols; ++t) {
      double sum = 0;
      for (int v = 0; v < 4; ++v)
        for (int u = 0; u < 4; ++u) {
          const double y = std::clamp(static_cast<double>(pred.at(v, u, slot)), eps, 1 - eps);
          const double m = label.at(v, u) == t ? 1.0 : 0.0;
          sum += m * std::log(y) + (1 - m) * std::log(1 - y);
        }
      CHECK(cost.at(slot - 1, t - 1) == doctest::Approx(-sum / 16.0).epsilon(1e-9));
      CHECK(cost.at(slot - 1, t - 1) >= 0.0);
    }
}

TEST_CASE("hungarian_assign: diagonal and anti-diagonal optima") {
  CostMatrix diag(4, 4);
  for (int i = 0; i < 4; ++i) diag.at(i, i) = -1.0;
  CHECK(hungarian_assign(diag) == std::vector<int>{0, 1, 2, 3});

  CostMatrix anti(3, 3);
  for (int i = 0; i < 3; ++i) anti.at(2 - i, i) = -1.0;
  CHECK(hungarian_assign(anti) == std::vector<int>{2, 1, 0});
}

TEST_CASE("hungarian_assign: optimal on random 6x6 against all 720 permutations") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const CostMatrix cost = random_cost(rng, 6, 6);
    const auto rows = hungarian_assign(cost);
    std::set<int> distinct(rows.begin(), rows.end());
    REQUIRE(distinct.size() == 6);
    CHECK(assignment_cost(cost, rows) == brute_force_min_cost(cost));
  }
}

TEST_CASE("hungarian_assign: rectangular (more slots than labels)") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const CostMatrix cost = random_cost(rng, 7, 4);
    const auto rows = hungarian_assign(cost);
    REQUIRE(rows.size() == 4);
    std::set<int> distinct(rows.begin(), rows.end());
    CHECK(distinct.size() == 4);

    // exhaustive over injective 4-of-7 choices
    std::vector<int> pick(7);
    std::iota(pick.begin(), pick.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    std::sort(pick.begin(), pick.end());
    do {
      double total = 0;
      for (int c = 0; c < 4; ++c) total += cost.at(pick[c], c);
      best = std::min(best, total);
    } while (std::next_permutation(pick.begin(), pick.end()));
    CHECK(assignment_cost(cost, rows) == best);
  }
}

TEST_CASE("hungarian_assign: capacity and finiteness errors") {
  CHECK_THROWS_AS(hungarian_assign(CostMatrix(2, 3)), CapacityError);
  CostMatrix nan_cost(2, 2);
  nan_cost.at(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(hungarian_assign(nan_cost), InputError);
}

TEST_CASE("hungarian_assign is invariant under shift and positive scaling") {
  std::mt19937_64 rng(44);
  int tested = 0;
  while (tested < 20) {
    CostMatrix cost(5, 5);
    for (double& v : cost.values) v = gen::uniform(rng, -1.0, 1.0);
    // keep only instances with a unique optimum so the assignment is well-defined
    const auto base = hungarian_assign(cost);
    std::vector<int> rows(5);
    std::iota(rows.begin(), rows.end(), 0);
    const double best = assignment_cost(cost, base);
    int optima = 0;
    do {
      double total = 0;
      for (int c = 0; c < 5; ++c) total += cost.at(rows[c], c);
      if (total <= best + 1e-12) ++optima;
    } while (std::next_permutation(rows.begin(), rows.end()));
    if (optima != 1) continue;
    ++tested;

    CostMatrix shifted = cost, scaled = cost;
    for (double& v : shifted.values) v += 3.7;
    for (double& v : scaled.values) v *= 2.5;
    CHECK(hungarian_assign(shifted) == base);
    CHECK(hungarian_assign(scaled) == base);
  }
}

TEST_CASE("hungarian_assign recovers a planted permutation when U == T") {
  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 6;
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    CostMatrix cost(n, n);
    for (int c = 0; c < n; ++c) cost.at(perm[c], c) = -1.0;
    CHECK(hungarian_assign(cost) == perm);
  }
}

TEST_CASE("overlap_fill: identity when rendered equals label") {
  InstanceMap label(4, 4, 0);
  label.at(0, 0) = 1;
  label.at(1, 1) = 2;
  label.at(2, 2) = 2;
  std::int32_t fresh = 100;
  const auto out = overlap_fill(label, label, fresh);
  CHECK(out == label);
  CHECK(fresh == 100);
}

TEST_CASE("overlap_fill: the larger overlap wins the whole mask") {
  // label mask of 100 px split 60/40 across rendered ids 3 and 7
  InstanceMap label(10, 10, 1);
  InstanceMap rendered(10, 10, 0);
  for (int v = 0; v < 10; ++v)
    for (int u = 0; u < 10; ++u) rendered.at(v, u) = (v * 10 + u) < 60 ? 3 : 7;
  std::int32_t fresh = 50;
  const auto out = overlap_fill(label, rendered, fresh);
  for (const auto px : out.pixels) CHECK(px == 3);
  CHECK(fresh == 50);
}

TEST_CASE("overlap_fill: mask over background takes a fresh id") {
  InstanceMap label(3, 3, 0);
  label.at(0, 0) = 1;
  label.at(0, 1) = 1;
  InstanceMap rendered(3, 3, 0);
  std::int32_t fresh = 9;
  const auto out = overlap_fill(label, rendered, fresh);
  CHECK(out.at(0, 0) == 9);
  CHECK(out.at(0, 1) == 9);
  CHECK(fresh == 10);
}

TEST_CASE("overlap_fill: argmax ties resolve to the smallest rendered id") {
  InstanceMap label(1, 4, 1);
  InstanceMap rendered(1, 4, 0);
  rendered.at(0, 0) = 5;
  rendered.at(0, 1) = 5;
  rendered.at(0, 2) = 2;
  rendered.at(0, 3) = 2;
  std::int32_t fresh = 1;
  CHECK(overlap_fill(label, rendered, fresh).at(0, 0) == 2);
}

TEST_CASE("overlap_fill preserves mask supports exactly") {
  std::mt19937_64 rng(46);
  InstanceMap label(8, 8, 0), rendered(8, 8, 0);
  for (auto& px : label.pixels) px = static_cast<std::int32_t>(rng() % 4);
  for (auto& px : rendered.pixels) px = static_cast<std::int32_t>(rng() % 4);
  std::int32_t fresh = 100;
  const auto out = overlap_fill(label, rendered, fresh);

  // every label mask is monochrome in the output and background is untouched
  std::map<std::int32_t, std::set<std::int32_t>> images;
  for (std::size_t i = 0; i < label.size(); ++i) {
    if (label.pixels[i] == 0) {
      CHECK(out.pixels[i] == 0);
    } else {
      CHECK(out.pixels[i] >= 1);
      images[label.pixels[i]].insert(out.pixels[i]);
    }
  }
  for (const auto& [t, ids] : images) CHECK(ids.size() == 1);
}

TEST_CASE("overlap_fill: partition equality when rendered ids are distinct") {
  // two label masks overlapping two different rendered ids keep distinct ids
  InstanceMap label(2, 4, 0), rendered(2, 4, 0);
  label.at(0, 0) = 1;
  label.at(0, 1) = 1;
  label.at(1, 2) = 2;
  label.at(1, 3) = 2;
  rendered.at(0, 0) = 8;
  rendered.at(1, 2) = 3;
  std::int32_t fresh = 10;
  const auto out = overlap_fill(label, rendered, fresh);
  CHECK(out.at(0, 0) == 8);
  CHECK(out.at(0, 1) == 8);
  CHECK(out.at(1, 2) == 3);
  CHECK(out.at(1, 3) == 3);
  // same pixel partition as the input label map
  std::map<std::int32_t, std::int32_t> fwd;
  bool same = true;
  for (std::size_t i = 0; i < label.size(); ++i) {
    auto it = fwd.try_emplace(label.pixels[i], out.pixels[i]).first;
    if (it->second != out.pixels[i]) same = false;
  }
  CHECK(same);
}

TEST_CASE("overlap_fill: shape mismatch raises") {
  std::int32_t fresh = 0;
  CHECK_THROWS_AS(overlap_fill(InstanceMap(2, 2, 0), InstanceMap(3, 2, 0), fresh), DimensionError);
}
