#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <map>
#include <set>

#include "btmc/stats.hpp"
#include "btmc/tree.hpp"

using namespace btmc;

TEST_CASE("node_to_linear") {
  CHECK(node_to_linear(1, {1, 1}) == 1);
  CHECK(node_to_linear(1, {2, 2}) == 4);
  CHECK(node_to_linear(1, {2, 2, 1}) == 7);
  CHECK_THROWS_AS(node_to_linear(1, {3}), std::invalid_argument);
  CHECK_THROWS_AS(node_to_linear(2, {0}), std::invalid_argument);
  CHECK_THROWS_AS(node_to_linear(1, {}), std::invalid_argument);
}

TEST_CASE("linear_to_shift matches the tree figure") {
  CHECK(linear_to_shift(1, 2, 4) == std::vector<std::int64_t>{3});
  CHECK(linear_to_shift(1, 3, 7) == std::vector<std::int64_t>{6});
  CHECK(linear_to_shift(1, 1, 1) == std::vector<std::int64_t>{0});
  CHECK_THROWS_AS(linear_to_shift(1, 2, 5), std::invalid_argument);
  CHECK_THROWS_AS(linear_to_shift(1, 2, 0), std::invalid_argument);
}

TEST_CASE("node_to_linear is a bijection onto {1..2^{dj}}") {
  for (int d = 1; d <= 3; ++d)
    for (int j = 1; j <= (d == 3 ? 3 : 4); ++j) {
      const std::uint64_t count = std::uint64_t{1} << (d * j);
      std::set<std::uint64_t> images;
      std::vector<int> node(static_cast<std::size_t>(j), 1);
      for (std::uint64_t it = 0; it < count; ++it) {
        const std::uint64_t n = node_to_linear(d, node);
        CHECK(n >= 1);
        CHECK(n <= count);
        images.insert(n);
        // odometer increment over {1..2^d}^j
        for (int pos = j - 1; pos >= 0; --pos) {
          if (++node[static_cast<std::size_t>(pos)] <= (1 << d)) break;
          node[static_cast<std::size_t>(pos)] = 1;
        }
      }
      CHECK(images.size() == count);
    }
}

TEST_CASE("node-to-shift composition is bijective for d<=3, j<=4") {
  for (int d = 1; d <= 3; ++d) {
    for (int j = 1; j <= 4; ++j) {
      if (d * j > 12) continue;  // keep the exhaustive sweep small
      const std::uint64_t count = std::uint64_t{1} << (d * j);
      std::set<std::vector<std::int64_t>> images;
      for (std::uint64_t n = 1; n <= count; ++n) images.insert(linear_to_shift(d, j, n));
      CHECK(images.size() == count);
      // every image lies in K_j
      for (const auto& k : images)
        for (auto ki : k) {
          CHECK(ki >= 0);
          CHECK(ki < (1 << j));
        }
    }
  }
  // full d=3, j=4 sweep as well (4096 labels)
  const std::uint64_t count = std::uint64_t{1} << 12;
  std::set<std::vector<std::int64_t>> images;
  for (std::uint64_t n = 1; n <= count; ++n) images.insert(linear_to_shift(3, 4, n));
  CHECK(images.size() == count);
}

TEST_CASE("sample_tree degenerate densities") {
  TreeParams params{1, 0.0};
  auto gate = gate_source(SampleKey{1, 0, 0, 0, 0, 0});
  const auto none = sample_tree(params, 4, gate);
  CHECK(none.scales[0] == std::vector<std::uint64_t>{1});
  for (int j = 1; j <= 4; ++j) CHECK(none.nodes_at(j) == 0);

  params.beta = 1.0;
  const auto full = sample_tree(params, 3, gate);
  for (int j = 0; j <= 3; ++j) {
    CHECK(full.nodes_at(j) == (std::size_t{1} << j));
    // all labels 1..2^j present
    for (std::size_t i = 0; i < full.scales[static_cast<std::size_t>(j)].size(); ++i)
      CHECK(full.scales[static_cast<std::size_t>(j)][i] == i + 1);
  }
}

TEST_CASE("sample_tree reproduces the reference elimination pattern") {
  // survival table: child slots of the d=1, depth-3 example tree
  const std::map<std::pair<int, std::uint64_t>, bool> alive = {
      {{1, 1}, true},  {{1, 2}, true},                     // (1), (2)
      {{2, 1}, true},  {{2, 2}, true},                     // (1,1), (1,2)
      {{2, 3}, false}, {{2, 4}, true},                     // (2,1) gone, (2,2)
      {{3, 1}, false}, {{3, 2}, true},                     // (1,1,1) gone, (1,1,2)
      {{3, 3}, false}, {{3, 4}, false},                    // children of (1,2)
      {{3, 7}, true},  {{3, 8}, false},                    // (2,2,1), (2,2,2) gone
  };
  GateSource gate = [&](int j, std::uint64_t n) {
    return alive.at({j, n}) ? 0.25 : 0.75;
  };
  const auto set = sample_tree(TreeParams{1, 0.5}, 3, gate);

  std::set<std::pair<int, std::int64_t>> jk;
  for (int j = 0; j <= 3; ++j)
    for (std::uint64_t n : set.scales[static_cast<std::size_t>(j)])
      jk.insert({j, linear_to_shift(1, j, n)[0]});

  const std::set<std::pair<int, std::int64_t>> expected = {
      {0, 0}, {1, 0}, {1, 1}, {2, 0}, {2, 1}, {2, 3}, {3, 1}, {3, 6}};
  CHECK(jk == expected);
}

TEST_CASE("ancestor closure and per-scale growth bound") {
  TreeParams params{2, 0.55};
  for (int rep = 0; rep < 20; ++rep) {
    auto gate = gate_source(SampleKey{99, 0, static_cast<std::uint32_t>(rep), 0, 0, 0});
    const auto set = sample_tree(params, 6, gate);
    for (int j = 1; j <= 6; ++j) {
      const auto& cur = set.scales[static_cast<std::size_t>(j)];
      const auto& par = set.scales[static_cast<std::size_t>(j - 1)];
      CHECK(cur.size() <= 4 * par.size());
      for (std::uint64_t n : cur) {
        const std::uint64_t parent = ActiveIndexSet::parent_label(n, 2);
        CHECK(std::find(par.begin(), par.end(), parent) != par.end());
      }
    }
  }
}

TEST_CASE("extinction probabilities") {
  CHECK(extinction_probability({2, 0.25}) == 1.0);      // mean offspring 1
  CHECK(extinction_probability({1, 0.25}) == 1.0);      // subcritical
  CHECK(std::abs(extinction_probability({1, 0.75}) - 1.0 / 9.0) < 1e-12);

  // independent oracle: bisection on f(q) - q over [0, 1/2]
  auto f = [](double q) { return std::pow((1.0 + q) / 2.0, 4.0) - q; };
  double lo = 0.0, hi = 0.5;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  const double oracle = 0.5 * (lo + hi);
  CHECK(oracle == doctest::Approx(0.0873780253841527).epsilon(1e-10));
  CHECK(std::abs(extinction_probability({2, 0.5}) - oracle) < 1e-12);

  // depth-truncated analytics agree with the fixed point in the limit
  CHECK(extinction_probability_by_depth({1, 0.75}, 60) ==
        doctest::Approx(1.0 / 9.0).epsilon(1e-9));
}

TEST_CASE("expected nodes per scale") {
  CHECK(expected_nodes_per_scale({2, 0.5}, 0) == 1.0);
  CHECK(expected_nodes_per_scale({2, 0.5}, 8) == doctest::Approx(256.0));
  CHECK(expected_nodes_per_scale({2, 0.25}, 5) == doctest::Approx(1.0));
}

TEST_CASE("empirical mean nodes per scale matches 2^{j gamma}") {
  const TreeParams params{2, 0.5};
  const int reps = 10000, N = 8;
  std::vector<std::vector<double>> counts(N + 1, std::vector<double>(reps));
  for (int rep = 0; rep < reps; ++rep) {
    auto gate = gate_source(SampleKey{7, 0, static_cast<std::uint32_t>(rep), 0, 0, 0});
    const auto set = sample_tree(params, N, gate);
    for (int j = 0; j <= N; ++j)
      counts[static_cast<std::size_t>(j)][static_cast<std::size_t>(rep)] =
          static_cast<double>(set.nodes_at(j));
  }
  for (int j = 0; j <= N; ++j) {
    const auto mv = mean_var(counts[static_cast<std::size_t>(j)]);
    const double se = std::sqrt(mv.var / reps);
    CHECK(std::abs(mv.mean - expected_nodes_per_scale(params, j)) <= 3.0 * se + 1e-12);
  }
}

TEST_CASE("empirical extinction frequency, supercritical cases") {
  for (const auto& [d, beta] : std::vector<std::pair<int, double>>{{1, 0.75}, {2, 0.5}}) {
    const TreeParams params{d, beta};
    const double q = extinction_probability(params);
    const int n = 100000;
    int extinct = 0;
    RngStream stream(SampleKey{2718, 0, 0, 0, static_cast<std::uint64_t>(d * 100), 0}, 7);
    for (int i = 0; i < n; ++i)
      if (!survives_to_depth(params, 30, stream)) ++extinct;
    const double freq = static_cast<double>(extinct) / n;
    const double sigma = std::sqrt(q * (1.0 - q) / n);
    CHECK(std::abs(freq - q) <= 3.0 * sigma);
  }
}
