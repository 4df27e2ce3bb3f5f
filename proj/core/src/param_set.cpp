#include "stpen/param_set.hpp"

#include <cmath>

#include "stpen/errors.hpp"

namespace stpen {

Tensor& ParamSet::add(const std::string& path, Tensor value) {
  auto [it, inserted] = params_.emplace(path, std::move(value));
  if (!inserted) throw ConsistencyError("duplicate parameter path '" + path + "'");
  return it->second;
}

const Tensor& ParamSet::get(const std::string& path) const {
  auto it = params_.find(path);
  if (it == params_.end()) throw ConsistencyError("missing parameter '" + path + "'");
  return it->second;
}

Tensor& ParamSet::get(const std::string& path) {
  auto it = params_.find(path);
  if (it == params_.end()) throw ConsistencyError("missing parameter '" + path + "'");
  return it->second;
}

std::vector<std::string> ParamSet::paths() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [path, _] : params_) out.push_back(path);
  return out;
}

std::size_t ParamSet::total_elements() const {
  std::size_t n = 0;
  for (const auto& [_, t] : params_) n += t.numel();
  return n;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  for (const auto& [path, t] : params_) out.add(path, Tensor::zeros(t.shape()));
  return out;
}

ParamBinding::ParamBinding(const ParamSet& params, bool requires_grad) {
  for (const auto& [path, t] : params) {
    vars_.emplace(path, requires_grad ? Var::leaf(t) : Var::constant(t));
  }
}

const Var& ParamBinding::operator[](const std::string& path) const {
  auto it = vars_.find(path);
  if (it == vars_.end()) throw ConsistencyError("parameter '" + path + "' is not bound");
  return it->second;
}

void ParamBinding::rebind(const std::string& path, Var var) {
  auto it = vars_.find(path);
  if (it == vars_.end()) throw ConsistencyError("parameter '" + path + "' is not bound");
  if (var.shape() != it->second.shape()) {
    throw ShapeError("rebinding '" + path + "' with shape " + shape_to_string(var.shape()) + ", expected " +
                     shape_to_string(it->second.shape()));
  }
  it->second = std::move(var);
}

ParamSet ParamBinding::gradients() const {
  ParamSet out;
  for (const auto& [path, v] : vars_) out.add(path, v.grad());
  return out;
}

void ParamBinding::accumulate_gradients(ParamSet& sink, double factor) const {
  for (const auto& [path, v] : vars_) {
    Tensor& dst = sink.get(path);
    if (!v.has_grad()) continue;
    const Tensor& g = v.node()->grad;
    for (std::size_t i = 0; i < dst.numel(); ++i) dst[i] += factor * g[i];
  }
}

Tensor uniform_fan_in(Shape shape, std::size_t fan_in, Rng& rng, double gain) {
  const double bound = gain * std::sqrt(1.0 / static_cast<double>(fan_in));
  Tensor t(std::move(shape));
  for (auto& v : t.storage()) v = uniform(rng, -bound, bound);
  round_to_float(t);
  return t;
}

void round_to_float(Tensor& t) {
  for (auto& v : t.storage()) v = static_cast<double>(static_cast<float>(v));
}

}  // namespace stpen
