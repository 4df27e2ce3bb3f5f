#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stpen/autograd.hpp"

namespace stpen {

/// Builds a graph from leaf inputs. Non-scalar outputs are sum-reduced.
using GraphFn = std::function<Var(const std::vector<Var>& inputs)>;

struct GradCheckOptions {
  double eps = 1e-6;
  /// Entries probed per input; 0 probes all of them. Probed entries are drawn with `seed`.
  std::size_t max_entries_per_input = 0;
  std::uint64_t seed = 0;
  /// Inputs that are not differentiated (e.g. integer-like data).
  std::vector<bool> skip_input;
};

struct GradCheckResult {
  /// max |analytic - numeric| / max(1, |analytic|, |numeric|).
  double max_rel_error = 0.0;
  std::size_t worst_input = 0;
  std::size_t worst_index = 0;
  std::size_t probed = 0;
  /// Set when a value or derivative was not finite.
  std::optional<std::string> failure;

  bool passed(double tolerance) const { return !failure && max_rel_error < tolerance; }
};

/// Central-difference check of reverse-mode gradients. eps must lie in [1e-7, 1e-3].
GradCheckResult grad_check(const GraphFn& fn, const std::vector<Tensor>& inputs, const GradCheckOptions& options = {});

}  // namespace stpen
