#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "gaitenc/autodiff.hpp"
#include "gaitenc/rng.hpp"
#include "gaitenc/tensor.hpp"

namespace gaitenc {

// Named trainable tensor with a gradient accumulator.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  bool frozen = false;

  Parameter() = default;
  Parameter(std::string n, Tensor v)
      : name(std::move(n)), value(std::move(v)), grad(Tensor::zeros(value.shape())) {}

  void zero_grad() { grad.fill(0.0); }
};

// Initialization is a pure function of (seed, parameter name): which other
// parameters exist, and in what order they are created, cannot change it.
inline void init_uniform(Parameter& p, double bound, std::uint64_t seed) {
  Rng rng(seed_mix(seed, fnv1a(p.name)));
  for (double& v : p.value.data()) v = rng.uniform(-bound, bound);
  p.zero_grad();
}

inline void init_constant(Parameter& p, double c) {
  p.value.fill(c);
  p.zero_grad();
}

// Binds parameters to a tape as leaves, one leaf per parameter per graph.
class GraphBinding {
public:
  explicit GraphBinding(Tape& tape) : tape_(&tape) {}

  Var operator()(Parameter& p) {
    auto it = vars_.find(&p);
    if (it != vars_.end()) return it->second;
    Var v = tape_->leaf(p.value);
    vars_.emplace(&p, v);
    return v;
  }

  bool bound(const Parameter& p) const {
    return vars_.count(const_cast<Parameter*>(&p)) > 0;
  }

  // Adds tape gradients into each bound parameter's accumulator.
  void accumulate_grads() {
    for (auto& [p, var] : vars_) {
      const Tensor& g = tape_->grad(var);
      for (int i = 0; i < g.size(); ++i) p->grad[i] += g[i];
    }
  }

private:
  Tape* tape_;
  std::unordered_map<Parameter*, Var> vars_;
};

}  // namespace gaitenc
