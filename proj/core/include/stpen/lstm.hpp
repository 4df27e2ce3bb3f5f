#pragma once

#include <array>
#include <string>
#include <string_view>

#include "stpen/param_set.hpp"

namespace stpen {

/// Gate names used as parameter path segments: `<prefix>.<gate>.{wx,wh,b}`.
inline constexpr std::array<std::string_view, 4> kLstmGates{"input", "forget", "candidate", "output"};

struct LstmState {
  Var h;
  Var c;
};

/// Registers the twelve gate tensors under `prefix`.
void add_lstm_params(ParamSet& params, const std::string& prefix, std::size_t input_dim, std::size_t hidden_dim,
                     Rng& rng);

/// One LSTM cell step:
///   i, f, o = sigmoid(Wx x + Wh h + b), g = tanh(Wx x + Wh h + b),
///   c' = f*c + i*g, h' = o*tanh(c').
LstmState lstm_step(const Var& x, const Var& h, const Var& c, const ParamBinding& params,
                    const std::string& prefix);

}  // namespace stpen
