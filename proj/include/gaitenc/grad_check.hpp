#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gaitenc/parameter.hpp"

namespace gaitenc {

struct GradCheckEntry {
  std::string name;
  double max_rel_err = 0.0;
  double max_abs_analytic = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;

  double max_rel_err() const {
    double m = 0.0;
    for (const auto& e : entries) m = std::max(m, e.max_rel_err);
    return m;
  }

  bool all_below(double tol) const { return max_rel_err() < tol; }
};

// Central finite differences against analytic gradients, using the
// fourth-order five-point stencil at spacing eps so the oracle's own
// truncation error stays far below the tolerances it checks.
//   loss_fn:      recomputes the scalar loss from current parameter values
//   compute_grads: runs one forward+backward, filling each parameter's grad
// Frozen parameters are skipped. Intended for tiny models only; cost is
// 4 * (#elements) loss evaluations.
inline GradCheckReport grad_check(const std::vector<Parameter*>& params,
                                  const std::function<double()>& loss_fn,
                                  const std::function<void()>& compute_grads, double eps) {
  if (eps <= 0.0) throw std::invalid_argument("grad_check: eps must be positive");
  for (Parameter* p : params) p->zero_grad();
  compute_grads();

  GradCheckReport report;
  for (Parameter* p : params) {
    if (p->frozen) continue;
    GradCheckEntry entry;
    entry.name = p->name;
    for (int i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      auto at = [&](double delta) {
        p->value[i] = saved + delta;
        return loss_fn();
      };
      const double numeric = (-at(2 * eps) + 8 * at(eps) - 8 * at(-eps) + at(-2 * eps)) /
                             (12.0 * eps);
      p->value[i] = saved;
      const double analytic = p->grad[i];
      const double denom = std::max({1e-6, std::abs(numeric), std::abs(analytic)});
      entry.max_rel_err = std::max(entry.max_rel_err, std::abs(numeric - analytic) / denom);
      entry.max_abs_analytic = std::max(entry.max_abs_analytic, std::abs(analytic));
    }
    report.entries.push_back(std::move(entry));
  }
  for (Parameter* p : params) p->zero_grad();
  return report;
}

}  // namespace gaitenc
