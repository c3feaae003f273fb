#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "gaitenc/parameter.hpp"
#include "gaitenc/tensor.hpp"

namespace gaitenc {

struct AdamConfig {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 5.0;  // global gradient norm; <= 0 disables clipping
};

// Adam with global-norm gradient clipping. State is keyed by parameter name
// so checkpoint round-trips keep optimizer state addressable.
class Adam {
public:
  explicit Adam(AdamConfig config = {}) : config_(config) {
    if (config_.lr <= 0.0) throw std::invalid_argument("Adam: lr must be positive");
  }

  // Applies one update from the accumulated gradients and clears them.
  void step(const std::vector<Parameter*>& params) {
    ++t_;
    double scale = 1.0;
    if (config_.clip_norm > 0.0) {
      double norm_sq = 0.0;
      for (Parameter* p : params) {
        if (p->frozen) continue;
        norm_sq += squared_l2(p->grad);
      }
      const double norm = std::sqrt(norm_sq);
      if (norm > config_.clip_norm) scale = config_.clip_norm / norm;
    }
    const double bc1 = 1.0 - std::pow(config_.beta1, t_);
    const double bc2 = 1.0 - std::pow(config_.beta2, t_);
    for (Parameter* p : params) {
      if (p->frozen) {
        p->zero_grad();
        continue;
      }
      Moments& m = moments(*p);
      for (int i = 0; i < p->value.size(); ++i) {
        const double g = p->grad[i] * scale;
        m.m[i] = config_.beta1 * m.m[i] + (1.0 - config_.beta1) * g;
        m.v[i] = config_.beta2 * m.v[i] + (1.0 - config_.beta2) * g * g;
        const double mhat = m.m[i] / bc1;
        const double vhat = m.v[i] / bc2;
        p->value[i] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
      }
      p->zero_grad();
    }
  }

  const AdamConfig& config() const { return config_; }
  long step_count() const { return t_; }

private:
  struct Moments {
    Tensor m, v;
  };

  Moments& moments(const Parameter& p) {
    auto it = state_.find(p.name);
    if (it == state_.end()) {
      it = state_.emplace(p.name, Moments{Tensor::zeros(p.value.shape()),
                                          Tensor::zeros(p.value.shape())}).first;
    }
    return it->second;
  }

  AdamConfig config_;
  long t_ = 0;
  std::unordered_map<std::string, Moments> state_;
};

}  // namespace gaitenc
