#include "btmc/tree.hpp"

#include <cmath>
#include <stdexcept>

namespace btmc {

namespace {
constexpr std::uint32_t kRoleTreeGate = 0x54524545u;  // "TREE"
}

double TreeParams::gamma() const { return d + std::log2(beta); }

void validate_tree_params(const TreeParams& params) {
  if (params.d < 1 || params.d > 3) throw std::invalid_argument("tree: d must be in {1,2,3}");
  if (!(params.beta >= 0.0 && params.beta <= 1.0))
    throw std::invalid_argument("tree: beta must be in [0,1]");
}

std::uint64_t node_to_linear(int d, const std::vector<int>& node) {
  if (node.empty()) throw std::invalid_argument("node_to_linear: node must be nonempty");
  const int arity = 1 << d;
  std::uint64_t n = 0;
  for (int digit : node) {
    if (digit < 1 || digit > arity)
      throw std::invalid_argument("node_to_linear: entry out of {1..2^d}");
    n = n * static_cast<std::uint64_t>(arity) + static_cast<std::uint64_t>(digit - 1);
  }
  return n + 1;
}

std::vector<std::int64_t> linear_to_shift(int d, int j, std::uint64_t n) {
  const std::uint64_t count = std::uint64_t{1} << (static_cast<unsigned>(d) * static_cast<unsigned>(j));
  if (n < 1 || n > count) throw std::invalid_argument("linear_to_shift: n out of range");
  const std::uint64_t base = std::uint64_t{1} << j;
  std::vector<std::int64_t> k(static_cast<std::size_t>(d));
  std::uint64_t rest = n - 1;
  for (int i = 0; i < d; ++i) {
    k[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(rest % base);
    rest /= base;
  }
  return k;
}

std::size_t ActiveIndexSet::total_nodes() const {
  std::size_t c = 0;
  for (const auto& s : scales) c += s.size();
  return c;
}

std::size_t ActiveIndexSet::coefficient_count() const {
  const std::size_t types = (std::size_t{1} << d) - 1;
  std::size_t c = std::size_t{1} << d;  // scale 0 carries all of L_0
  for (std::size_t j = 1; j < scales.size(); ++j) c += scales[j].size() * types;
  return c;
}

GateSource gate_source(const SampleKey& key) {
  RngStream stream(key, kRoleTreeGate);
  return [stream](int j, std::uint64_t n) {
    return stream.u01_at(static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(n),
                         static_cast<std::uint32_t>(n >> 32), 0);
  };
}

ActiveIndexSet sample_tree(const TreeParams& params, int max_depth, const GateSource& gate) {
  validate_tree_params(params);
  if (max_depth < 0) throw std::invalid_argument("sample_tree: max_depth must be >= 0");

  ActiveIndexSet set;
  set.d = params.d;
  set.max_scale = max_depth;
  set.scales.assign(static_cast<std::size_t>(max_depth) + 1, {});
  set.scales[0] = {1};

  const int arity = 1 << params.d;
  for (int j = 0; j < max_depth; ++j) {
    const auto& cur = set.scales[static_cast<std::size_t>(j)];
    auto& next = set.scales[static_cast<std::size_t>(j) + 1];
    for (std::uint64_t n : cur) {
      const std::uint64_t first_child = (n - 1) * static_cast<std::uint64_t>(arity) + 1;
      for (int c = 0; c < arity; ++c) {
        const std::uint64_t child = first_child + static_cast<std::uint64_t>(c);
        if (gate(j + 1, child) < params.beta) next.push_back(child);
      }
    }
    // children of increasing parents in slot order are already sorted
  }
  return set;
}

double extinction_probability(const TreeParams& params) {
  validate_tree_params(params);
  const double arity = std::ldexp(1.0, params.d);
  if (arity * params.beta <= 1.0) return 1.0;
  double q = 0.0;
  for (int i = 0; i < 1000000; ++i) {
    const double qn = std::pow((1.0 - params.beta) + params.beta * q, arity);
    if (std::abs(qn - q) < 1e-15) return qn;
    q = qn;
  }
  return q;
}

double extinction_probability_by_depth(const TreeParams& params, int depth) {
  validate_tree_params(params);
  const double arity = std::ldexp(1.0, params.d);
  double q = 0.0;
  for (int i = 0; i < depth; ++i) q = std::pow((1.0 - params.beta) + params.beta * q, arity);
  return q;
}

double expected_nodes_per_scale(const TreeParams& params, int j) {
  validate_tree_params(params);
  if (j < 0) throw std::invalid_argument("expected_nodes_per_scale: j must be >= 0");
  return std::pow(std::ldexp(1.0, params.d) * params.beta, j);
}

bool survives_to_depth(const TreeParams& params, int depth_cap, RngStream& stream) {
  validate_tree_params(params);
  const int arity = 1 << params.d;
  constexpr std::uint64_t kCertainSurvival = 256;
  std::uint64_t alive = 1;
  for (int j = 0; j < depth_cap; ++j) {
    if (alive == 0) return false;
    if (alive >= kCertainSurvival) return true;
    std::uint64_t next = 0;
    for (std::uint64_t i = 0; i < alive; ++i)
      for (int c = 0; c < arity; ++c)
        if (stream.next_u01() < params.beta) ++next;
    alive = next;
  }
  return alive > 0;
}

}  // namespace btmc
