#include "stpen/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stpen/errors.hpp"
#include "stpen/ops.hpp"
#include "stpen/random.hpp"

namespace stpen {
namespace {

Var scalar_output(const GraphFn& fn, const std::vector<Var>& inputs) {
  Var out = fn(inputs);
  return out.value().numel() == 1 ? out : ops::sum(out);
}

double evaluate(const GraphFn& fn, const std::vector<Tensor>& inputs) {
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const auto& t : inputs) vars.push_back(Var::constant(t));
  return scalar_output(fn, vars).value()[0];
}

}  // namespace

GradCheckResult grad_check(const GraphFn& fn, const std::vector<Tensor>& inputs, const GradCheckOptions& options) {
  if (!(options.eps >= 1e-7 && options.eps <= 1e-3)) {
    throw ArgumentError("grad_check: eps must lie in [1e-7, 1e-3]");
  }
  GradCheckResult result;

  std::vector<Var> leaves;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const bool skip = k < options.skip_input.size() && options.skip_input[k];
    leaves.push_back(skip ? Var::constant(inputs[k]) : Var::leaf(inputs[k]));
  }
  Var out = scalar_output(fn, leaves);
  if (!std::isfinite(out.value()[0])) {
    result.failure = "non-finite forward value";
    result.max_rel_error = INFINITY;
    return result;
  }
  backward(out);

  Rng rng(options.seed);
  std::vector<Tensor> probe = inputs;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    if (!leaves[k].requires_grad()) continue;
    const Tensor analytic = leaves[k].grad();
    std::vector<std::size_t> entries(inputs[k].numel());
    std::iota(entries.begin(), entries.end(), std::size_t{0});
    if (options.max_entries_per_input && entries.size() > options.max_entries_per_input) {
      shuffle(entries, rng);
      entries.resize(options.max_entries_per_input);
      std::sort(entries.begin(), entries.end());
    }
    for (std::size_t idx : entries) {
      const double original = inputs[k][idx];
      probe[k][idx] = original + options.eps;
      const double up = evaluate(fn, probe);
      probe[k][idx] = original - options.eps;
      const double down = evaluate(fn, probe);
      probe[k][idx] = original;
      const double numeric = (up - down) / (2.0 * options.eps);
      const double a = analytic[idx];
      ++result.probed;
      if (!std::isfinite(numeric) || !std::isfinite(a)) {
        result.failure = "non-finite derivative at input " + std::to_string(k) + " entry " + std::to_string(idx);
        result.max_rel_error = INFINITY;
        result.worst_input = k;
        result.worst_index = idx;
        return result;
      }
      const double err = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
      if (err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_input = k;
        result.worst_index = idx;
      }
    }
  }
  return result;
}

}  // namespace stpen
