#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "requ_gap/growth_policy.hpp"
#include "requ_gap/network.hpp"

namespace requ_gap {

struct MembershipReport {
  bool member = true;
  std::vector<std::string> violations;
};

/// Whether R(net) lies in Sigma_n: d_in = d, d_out = 1, W <= n, depth <= l(n),
/// max_norm <= c(n). Infinite limits are treated as satisfied.
inline MembershipReport check_membership(const NeuralNetwork& net, const SigmaBudget& budget,
                                         std::optional<std::size_t> d = std::nullopt) {
  MembershipReport rep;
  auto fail = [&](std::string what) {
    rep.member = false;
    rep.violations.push_back(std::move(what));
  };
  if (d && net.input_dim() != *d) {
    fail("input_dim " + std::to_string(net.input_dim()) + " != d = " + std::to_string(*d));
  }
  if (net.output_dim() != 1) fail("output_dim " + std::to_string(net.output_dim()) + " != 1");
  if (net.weight_count() > budget.n) {
    fail("weight_count " + std::to_string(net.weight_count()) + " > n = " + std::to_string(budget.n));
  }
  const int depth_limit = budget.depth_limit();
  if (static_cast<double>(net.depth()) > static_cast<double>(depth_limit)) {
    fail("depth " + std::to_string(net.depth()) + " > l(n) = " + std::to_string(depth_limit));
  }
  const double coef_limit = budget.coef_limit();
  if (!std::isinf(coef_limit) && net.max_norm() > coef_limit) {
    fail("max_norm " + std::to_string(net.max_norm()) + " > c(n) = " + std::to_string(coef_limit));
  }
  return rep;
}

}  // namespace requ_gap
