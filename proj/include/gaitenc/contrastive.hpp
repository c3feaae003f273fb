#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gaitenc/autodiff.hpp"
#include "gaitenc/parameter.hpp"
#include "gaitenc/skeleton.hpp"

namespace gaitenc {

// MLP mapping a sequence-level encoding V (fK) into the contrasting space:
// z = W2 * relu(W1 * V).
struct ProjectionHead {
  Parameter w1;  // H x fK
  Parameter w2;  // K x H

  ProjectionHead(const std::string& prefix, int input_width, int hidden, int output_width)
      : w1(prefix + ".proj.w1", Tensor({hidden, input_width})),
        w2(prefix + ".proj.w2", Tensor({output_width, hidden})) {}

  void init(std::uint64_t seed) {
    init_uniform(w1, 1.0 / std::sqrt(static_cast<double>(w1.value.cols())), seed);
    init_uniform(w2, 1.0 / std::sqrt(static_cast<double>(w2.value.cols())), seed);
  }

  std::vector<Parameter*> parameters() { return {&w1, &w2}; }

  Var project(Tape& tape, GraphBinding& bind, Var v) {
    if (tape.value(v).size() != w1.value.cols()) {
      throw std::invalid_argument("project: input width " +
                                  std::to_string(tape.value(v).size()) + " != " +
                                  std::to_string(w1.value.cols()));
    }
    return tape.matvec(bind(w2), tape.relu(tape.matvec(bind(w1), v)));
  }
};

// Contrastive loss over the 2n-2 representations laid out as in the LCL
// scheme: z[k] and z[k+n-1] are the two halves of positive pair k (0-based,
// k = 0..n-2). The duplicate middle representations stay in every
// denominator; the indicator excludes only k == i by position.
inline Var lcl_loss(Tape& tape, const std::vector<Var>& z, double tau) {
  const int m = static_cast<int>(z.size());
  if (m < 2 || m % 2 != 0) {
    throw std::invalid_argument("lcl_loss: needs 2n-2 >= 2 representations, got " +
                                std::to_string(m));
  }
  if (tau <= 0.0) throw std::invalid_argument("lcl_loss: tau must be positive");
  const int n = m / 2 + 1;

  // scaled pairwise similarities; symmetric, so computed once per pair
  std::vector<std::vector<Var>> sim(m, std::vector<Var>(m));
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      Var s = tape.scale(tape.cosine(z[i], z[j]), 1.0 / tau);
      sim[i][j] = s;
      sim[j][i] = s;
    }
  }

  // log-sum-exp denominators with a detached max for stability
  std::vector<Var> lse(m);
  for (int i = 0; i < m; ++i) {
    double mx = -1e300;
    for (int k = 0; k < m; ++k) {
      if (k != i) mx = std::max(mx, tape.value(sim[i][k])[0]);
    }
    Var mx_const = tape.scalar(mx);
    Var acc;
    for (int k = 0; k < m; ++k) {
      if (k == i) continue;
      Var e = tape.exp(tape.sub(sim[i][k], mx_const));
      acc = acc.valid() ? tape.add(acc, e) : e;
    }
    lse[i] = tape.add(mx_const, tape.log(acc));
  }

  auto pair_loss = [&](int i, int j) { return tape.sub(lse[i], sim[i][j]); };

  Var total;
  for (int k = 0; k < n - 1; ++k) {
    Var both = tape.add(pair_loss(k, k + n - 1), pair_loss(k + n - 1, k));
    total = total.valid() ? tape.add(total, both) : both;
  }
  return tape.scale(total, 1.0 / static_cast<double>(m));
}

// Value-level cosine similarity (no tape); errors on zero vectors.
inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine_similarity: size mismatch");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) throw std::invalid_argument("cosine_similarity: zero vector");
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

// Groups one recording's windows (temporal order) into batches of n with a
// seq_index gap of `interval` between members. Batch b starts at window
// b*n*interval; the trailing remainder is dropped, never padded.
inline std::vector<std::vector<int>> make_batches(std::span<const SkeletonSequence> windows,
                                                  int n, int interval) {
  if (n < 2) throw std::invalid_argument("make_batches: n must be >= 2");
  if (interval < 1) throw std::invalid_argument("make_batches: interval must be >= 1");
  for (std::size_t i = 1; i < windows.size(); ++i) {
    if (windows[i].seq_index != windows[i - 1].seq_index + 1 ||
        windows[i].recording != windows[i - 1].recording) {
      throw std::invalid_argument("make_batches: windows must be one recording's consecutive sequence");
    }
  }
  std::vector<std::vector<int>> batches;
  const int count = static_cast<int>(windows.size());
  for (int start = 0; start + (n - 1) * interval < count; start += n * interval) {
    std::vector<int> members(n);
    for (int k = 0; k < n; ++k) members[k] = start + k * interval;
    batches.push_back(std::move(members));
  }
  return batches;
}

}  // namespace gaitenc
