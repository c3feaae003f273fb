#pragma once

// Shared helpers for the test binaries: fixed pretext batches and a
// one-dimension rebuild of the combined training loss, mirroring what the
// trainer does per step so gradients can be finite-difference checked.

#include <optional>
#include <span>
#include <vector>

#include "gaitenc/contrastive.hpp"
#include "gaitenc/model.hpp"
#include "gaitenc/skeleton.hpp"
#include "gaitenc/train.hpp"

namespace testsup {

using namespace gaitenc;

struct LossParts {
  double ls = 0.0;
  double la = 0.0;
  double lc = 0.0;
  double total = 0.0;
};

// Builds the combined loss for one dimension model over a fixed batch of
// pretext samples. When `accumulate` is set, runs backward and adds the tape
// gradients into the model parameters.
inline LossParts combined_loss(GaitModelDim& dm, std::span<const PretextSample> samples,
                               const LossWeights& weights, double tau, bool use_lcl,
                               bool accumulate) {
  Tape tape;
  GraphBinding bind(tape);
  std::vector<Var> param_vars;
  for (Parameter* p : dm.parameters()) param_vars.push_back(bind(*p));

  Var loss_s;
  std::optional<Var> loss_a;
  std::vector<Var> sequence_encodings;
  for (const PretextSample& sample : samples) {
    const DimensionSlice input = DimensionSlice::from_sequence(sample.input, dm.dim());
    const DimensionSlice target = DimensionSlice::from_sequence(sample.target, dm.dim());
    EncodeResult enc = dm.encode(tape, bind, input);
    DecodeTrace trace = dm.decode_sequence(tape, bind, enc, sample, Phase::Train);
    Var ls = reconstruction_loss(tape, trace, target);
    loss_s = loss_s.valid() ? tape.add(loss_s, ls) : ls;
    if (dm.mode() == AttentionMode::LAS) {
      Var la = alignment_loss(tape, trace, dm.mode());
      loss_a = loss_a ? tape.add(*loss_a, la) : la;
    }
    if (use_lcl) sequence_encodings.push_back(tape.concat(trace.context));
  }
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  loss_s = tape.scale(loss_s, inv_n);
  if (loss_a) loss_a = tape.scale(*loss_a, inv_n);

  std::optional<Var> loss_c;
  if (use_lcl) {
    std::vector<Var> projected(sequence_encodings.size());
    for (std::size_t i = 0; i < sequence_encodings.size(); ++i) {
      projected[i] = dm.projection().project(tape, bind, sequence_encodings[i]);
    }
    std::vector<Var> z;
    for (int k = 0; k + 1 < static_cast<int>(projected.size()); ++k) z.push_back(projected[k]);
    for (int k = 0; k + 1 < static_cast<int>(projected.size()); ++k) z.push_back(projected[k + 1]);
    loss_c = lcl_loss(tape, z, tau);
  }

  Var total = total_loss(tape, loss_s, loss_a, loss_c, weights, param_vars);
  if (accumulate) {
    tape.backward(total);
    bind.accumulate_grads();
  }
  LossParts parts;
  parts.ls = tape.value(loss_s)[0];
  if (loss_a) parts.la = tape.value(*loss_a)[0];
  if (loss_c) parts.lc = tape.value(*loss_c)[0];
  parts.total = tape.value(total)[0];
  return parts;
}

// Fixed windows for a tiny deterministic recording.
inline Recording synthetic_recording(int identity, int frames, int joints, std::uint64_t seed) {
  Rng rng(seed);
  Recording r;
  r.identity = identity;
  r.rec = 0;
  for (int t = 0; t < frames; ++t) {
    SkeletonFrame f;
    for (int j = 0; j < joints; ++j) {
      f.joints.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
    }
    r.frames.push_back(std::move(f));
  }
  return r;
}

// A consecutive batch of n pretext samples for the given task.
inline std::vector<PretextSample> sample_batch(PretextTask task, int n, int f, int joints,
                                               std::uint64_t seed) {
  // enough frames for prediction targets past the last window
  Recording rec = synthetic_recording(1, 2 * f + n + 4, joints, seed);
  auto trimmed = trimmed_frames(rec, 0);
  auto windows = split_recording(rec, f, 0, 1);
  Rng rng(seed_mix(seed, 17));
  std::vector<PretextSample> out;
  for (int k = 0; k < n; ++k) {
    PretextResult pr = build_pretext(task, windows[k], trimmed, &rng);
    if (!pr.ok()) throw std::runtime_error("sample_batch: " + pr.skip_reason);
    out.push_back(std::move(*pr.sample));
  }
  return out;
}

}  // namespace testsup
