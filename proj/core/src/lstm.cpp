#include "stpen/lstm.hpp"

#include "stpen/errors.hpp"
#include "stpen/ops.hpp"

namespace stpen {

void add_lstm_params(ParamSet& params, const std::string& prefix, std::size_t input_dim, std::size_t hidden_dim,
                     Rng& rng) {
  for (auto gate : kLstmGates) {
    const std::string base = prefix + "." + std::string(gate);
    params.add(base + ".wx", uniform_fan_in({hidden_dim, input_dim}, hidden_dim, rng));
    params.add(base + ".wh", uniform_fan_in({hidden_dim, hidden_dim}, hidden_dim, rng));
    params.add(base + ".b", uniform_fan_in({hidden_dim}, hidden_dim, rng));
  }
}

LstmState lstm_step(const Var& x, const Var& h, const Var& c, const ParamBinding& params,
                    const std::string& prefix) {
  if (x.value().rank() != 1 || h.value().rank() != 1 || c.shape() != h.shape()) {
    throw ShapeError("lstm_step: x " + shape_to_string(x.shape()) + ", h " + shape_to_string(h.shape()) + ", c " +
                     shape_to_string(c.shape()));
  }
  auto affine = [&](std::string_view gate) {
    const std::string base = prefix + "." + std::string(gate);
    const Var& wx = params[base + ".wx"];
    const Var& wh = params[base + ".wh"];
    if (wx.value().rank() != 2 || wh.value().rank() != 2 || wx.shape()[0] != h.shape()[0] ||
        wh.shape()[0] != h.shape()[0] || wh.shape()[1] != h.shape()[0]) {
      throw ShapeError("lstm_step: gate " + base + " weights " + shape_to_string(wx.shape()) + "/" +
                       shape_to_string(wh.shape()) + " for hidden " + shape_to_string(h.shape()));
    }
    Var zero_bias = Var::constant(Tensor::zeros(h.shape()));
    return ops::add(ops::linear(x, wx, params[base + ".b"]), ops::linear(h, wh, zero_bias));
  };
  Var i = ops::sigmoid(affine("input"));
  Var f = ops::sigmoid(affine("forget"));
  Var g = ops::tanh(affine("candidate"));
  Var o = ops::sigmoid(affine("output"));
  Var c_next = ops::add(ops::mul(f, c), ops::mul(i, g));
  Var h_next = ops::mul(o, ops::tanh(c_next));
  return {h_next, c_next};
}

}  // namespace stpen
