#pragma once

#include <map>
#include <string>
#include <vector>

#include "stpen/autograd.hpp"
#include "stpen/random.hpp"
#include "stpen/tensor.hpp"

namespace stpen {

/// Named parameters keyed by dot-separated path; iteration is lexicographic.
class ParamSet {
 public:
  using Map = std::map<std::string, Tensor>;

  /// Throws ConsistencyError if `path` already exists.
  Tensor& add(const std::string& path, Tensor value);
  bool contains(const std::string& path) const { return params_.count(path) != 0; }
  const Tensor& get(const std::string& path) const;
  Tensor& get(const std::string& path);

  std::vector<std::string> paths() const;
  std::size_t size() const { return params_.size(); }
  std::size_t total_elements() const;

  Map::iterator begin() { return params_.begin(); }
  Map::iterator end() { return params_.end(); }
  Map::const_iterator begin() const { return params_.begin(); }
  Map::const_iterator end() const { return params_.end(); }

  /// Same paths and shapes, all zeros.
  ParamSet zeros_like() const;

  friend bool operator==(const ParamSet&, const ParamSet&) = default;

 private:
  Map params_;
};

/// Graph leaves bound to a ParamSet for one forward/backward pass.
class ParamBinding {
 public:
  explicit ParamBinding(const ParamSet& params, bool requires_grad = true);

  const Var& operator[](const std::string& path) const;
  bool contains(const std::string& path) const { return vars_.count(path) != 0; }

  /// Replaces the graph leaf of an existing path (same shape), e.g. with a probe input.
  void rebind(const std::string& path, Var var);

  /// Gradients of every bound parameter (zeros where nothing flowed).
  ParamSet gradients() const;
  /// Adds `factor` times each gradient into `sink`, in path order.
  void accumulate_gradients(ParamSet& sink, double factor = 1.0) const;

 private:
  std::map<std::string, Var> vars_;
};

/// Uniform in +-gain sqrt(1/fan_in), rounded to float precision.
Tensor uniform_fan_in(Shape shape, std::size_t fan_in, Rng& rng, double gain = 1.0);

/// Rounds every element to the nearest 32-bit float.
void round_to_float(Tensor& t);

}  // namespace stpen
