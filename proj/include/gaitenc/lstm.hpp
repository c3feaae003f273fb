#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gaitenc/autodiff.hpp"
#include "gaitenc/parameter.hpp"

namespace gaitenc {

// One LSTM cell: four gates, each with input weights W (K x D_in),
// recurrent weights U (K x K) and bias b (K).
struct LstmCellParams {
  int input_size = 0;
  int hidden_size = 0;
  Parameter w_i, u_i, b_i;
  Parameter w_f, u_f, b_f;
  Parameter w_o, u_o, b_o;
  Parameter w_g, u_g, b_g;

  LstmCellParams() = default;

  LstmCellParams(const std::string& prefix, int d_in, int k)
      : input_size(d_in),
        hidden_size(k),
        w_i(prefix + ".w_i", Tensor({k, d_in})),
        u_i(prefix + ".u_i", Tensor({k, k})),
        b_i(prefix + ".b_i", Tensor({k})),
        w_f(prefix + ".w_f", Tensor({k, d_in})),
        u_f(prefix + ".u_f", Tensor({k, k})),
        b_f(prefix + ".b_f", Tensor({k})),
        w_o(prefix + ".w_o", Tensor({k, d_in})),
        u_o(prefix + ".u_o", Tensor({k, k})),
        b_o(prefix + ".b_o", Tensor({k})),
        w_g(prefix + ".w_g", Tensor({k, d_in})),
        u_g(prefix + ".u_g", Tensor({k, k})),
        b_g(prefix + ".b_g", Tensor({k})) {}

  std::vector<Parameter*> parameters() {
    return {&w_i, &u_i, &b_i, &w_f, &u_f, &b_f, &w_o, &u_o, &b_o, &w_g, &u_g, &b_g};
  }

  // uniform(-1/sqrt(K)) weights, zero biases, forget bias +1
  void init(std::uint64_t seed) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_size));
    for (Parameter* w : {&w_i, &u_i, &w_f, &u_f, &w_o, &u_o, &w_g, &u_g}) {
      init_uniform(*w, bound, seed);
    }
    for (Parameter* b : {&b_i, &b_o, &b_g}) init_constant(*b, 0.0);
    init_constant(b_f, 1.0);
  }
};

struct LstmState {
  Var hidden;
  Var cell;
};

// Standard LSTM recurrence:
//   i = sig(Wi x + Ui h + bi), f = sig(Wf x + Uf h + bf)
//   o = sig(Wo x + Uo h + bo), g = tanh(Wg x + Ug h + bg)
//   c' = f*c + i*g, h' = o*tanh(c')
inline LstmState lstm_step(Tape& tape, GraphBinding& bind, LstmCellParams& p, Var input,
                           LstmState state) {
  const Tensor& x = tape.value(input);
  if (x.size() != p.input_size) {
    throw std::invalid_argument("lstm_step: input size " + std::to_string(x.size()) +
                                " != expected " + std::to_string(p.input_size));
  }
  auto gate = [&](Parameter& w, Parameter& u, Parameter& b) {
    return tape.add(tape.add(tape.matvec(bind(w), input), tape.matvec(bind(u), state.hidden)),
                    bind(b));
  };
  Var i = tape.sigmoid(gate(p.w_i, p.u_i, p.b_i));
  Var f = tape.sigmoid(gate(p.w_f, p.u_f, p.b_f));
  Var o = tape.sigmoid(gate(p.w_o, p.u_o, p.b_o));
  Var g = tape.tanh(gate(p.w_g, p.u_g, p.b_g));
  Var c = tape.add(tape.mul(f, state.cell), tape.mul(i, g));
  Var h = tape.mul(o, tape.tanh(c));
  return {h, c};
}

inline LstmState lstm_zero_state(Tape& tape, int hidden_size) {
  return {tape.zeros({hidden_size}), tape.zeros({hidden_size})};
}

}  // namespace gaitenc
