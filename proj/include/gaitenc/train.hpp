#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "gaitenc/config.hpp"
#include "gaitenc/contrastive.hpp"
#include "gaitenc/model.hpp"
#include "gaitenc/optimizer.hpp"
#include "gaitenc/skeleton.hpp"

namespace gaitenc {

// The three per-dimension models trained together. Parameters are
// namespaced X./Y./Z. so a single checkpoint holds all of them.
class GaitModel {
public:
  GaitModel(int f, int num_joints, int hidden, int d_window, AttentionMode mode,
            bool with_projection, int proj_hidden = 0) {
    dims_.reserve(3);
    for (Dim3 d : {Dim3::X, Dim3::Y, Dim3::Z}) {
      dims_.emplace_back(d, f, num_joints, hidden, d_window, mode, with_projection, proj_hidden);
    }
  }

  static GaitModel from_config(const RunConfig& c) {
    return GaitModel(c.f, c.num_joints, c.hidden, c.window, c.attention_mode(), c.lambda_c > 0,
                     c.proj_hidden);
  }

  GaitModelDim& dim(Dim3 d) { return dims_[static_cast<int>(d)]; }
  const GaitModelDim& dim(Dim3 d) const { return dims_[static_cast<int>(d)]; }

  int f() const { return dims_[0].f(); }
  int num_joints() const { return dims_[0].num_joints(); }
  int hidden() const { return dims_[0].hidden(); }
  AttentionMode mode() const { return dims_[0].mode(); }

  std::vector<Parameter*> all_parameters() {
    std::vector<Parameter*> out;
    for (auto& d : dims_) {
      for (Parameter* p : d.parameters()) out.push_back(p);
    }
    return out;
  }

  void init(std::uint64_t seed) {
    for (auto& d : dims_) d.init(seed);
  }

private:
  std::vector<GaitModelDim> dims_;
};

struct EpochLoss {
  double ls = 0.0;
  double la = 0.0;
  double lc = 0.0;
  double total = 0.0;
};

struct TrainResult {
  std::array<std::vector<EpochLoss>, 3> curves;  // indexed by Dim3
  std::vector<std::string> warnings;
  int training_sequences = 0;
};

namespace detail {

// One recording's training material: trimmed frames plus its usable windows.
struct RecordingWindows {
  std::vector<SkeletonFrame> trimmed;
  std::vector<SkeletonSequence> windows;
  int identity = 0;
  int rec = 0;
};

struct ScheduledBatch {
  int recording = 0;  // index into RecordingWindows list
  std::vector<PretextSample> samples;
};

inline std::vector<RecordingWindows> prepare_training_windows(const Dataset& ds,
                                                              PretextTask task, int f,
                                                              int discard, int step,
                                                              std::vector<std::string>& warnings) {
  std::vector<RecordingWindows> out;
  for (const Recording& r : ds.recordings) {
    if (ds.manifest.split_for(r.identity, r.rec).phase != SplitPhase::Train) continue;
    RecordingWindows rw;
    rw.identity = r.identity;
    rw.rec = r.rec;
    rw.trimmed = trimmed_frames(r, discard);
    rw.windows = split_recording(r, f, discard, step);
    if (task == PretextTask::Prediction || task == PretextTask::HalfPrediction) {
      // prediction targets need future frames; drop unusable tail windows up
      // front so the remaining timeline stays contiguous
      while (!rw.windows.empty()) {
        PretextResult probe = build_pretext(task, rw.windows.back(), rw.trimmed, nullptr);
        if (probe.ok()) break;
        warnings.push_back("id=" + std::to_string(r.identity) + " rec=" + std::to_string(r.rec) +
                           ": " + probe.skip_reason);
        rw.windows.pop_back();
      }
    }
    if (!rw.windows.empty()) out.push_back(std::move(rw));
  }
  return out;
}

}  // namespace detail

// Self-supervised training of all three dimension models. Deterministic for
// a fixed (config, seed): the per-epoch schedule (batch order and sorting
// permutations) is drawn once and shared by the three dimensions, which run
// independently (optionally on separate threads).
inline TrainResult train(GaitModel& model, const Dataset& ds, const RunConfig& cfg) {
  validate_or_throw(cfg);
  if (cfg.tasks().size() != 1) {
    throw std::invalid_argument("train: one pretext task per run; train each task separately");
  }
  const PretextTask task = cfg.tasks().front();
  const AttentionMode mode = cfg.attention_mode();
  const LossWeights weights = cfg.loss_weights();
  const bool use_lcl = weights.lambda_c > 0;
  if (use_lcl && mode == AttentionMode::None) {
    throw std::invalid_argument("train: contrastive loss needs attention context vectors");
  }
  const int f = cfg.f;
  const int n = cfg.batch;

  TrainResult result;
  auto recs = detail::prepare_training_windows(ds, task, f, cfg.head_tail_discard,
                                               cfg.effective_step(), result.warnings);
  if (recs.empty()) throw std::runtime_error("train: no usable training recordings");

  // batches never span recordings; adjacency is only defined inside one
  struct BatchRef {
    int recording;
    std::vector<int> members;
  };
  std::vector<BatchRef> batches;
  for (int ri = 0; ri < static_cast<int>(recs.size()); ++ri) {
    if (static_cast<int>(recs[ri].windows.size()) < n) {
      result.warnings.push_back("id=" + std::to_string(recs[ri].identity) + " rec=" +
                                std::to_string(recs[ri].rec) + ": only " +
                                std::to_string(recs[ri].windows.size()) +
                                " sequences, need n=" + std::to_string(n) + "; skipped");
      continue;
    }
    for (auto& members : make_batches(recs[ri].windows, n, cfg.interval)) {
      batches.push_back({ri, std::move(members)});
    }
    result.training_sequences += static_cast<int>(recs[ri].windows.size());
  }
  if (batches.empty()) throw std::runtime_error("train: no training batches; every recording is shorter than one batch");

  Rng root(cfg.seed);
  for (auto& curve : result.curves) curve.reserve(cfg.epochs);

  std::array<std::unique_ptr<Adam>, 3> optimizers;
  for (auto& opt : optimizers) opt = std::make_unique<Adam>(cfg.adam());

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng epoch_rng = root.fork("epoch-" + std::to_string(epoch));
    std::vector<int> order(batches.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    epoch_rng.shuffle(order);

    // shared schedule: samples are identical for the X/Y/Z models
    std::vector<detail::ScheduledBatch> schedule;
    schedule.reserve(order.size());
    for (int bi : order) {
      const BatchRef& b = batches[bi];
      detail::ScheduledBatch sb;
      sb.recording = b.recording;
      for (int wi : b.members) {
        PretextResult pr =
            build_pretext(task, recs[b.recording].windows[wi], recs[b.recording].trimmed,
                          &epoch_rng);
        if (!pr.ok()) throw std::runtime_error("train: unexpected pretext skip: " + pr.skip_reason);
        sb.samples.push_back(std::move(*pr.sample));
      }
      schedule.push_back(std::move(sb));
    }

    std::array<EpochLoss, 3> epoch_losses;
    std::array<std::exception_ptr, 3> errors{};

    auto run_dim = [&](int di) {
      int step_idx = 0;
      try {
        GaitModelDim& dm = model.dim(static_cast<Dim3>(di));
        std::vector<Parameter*> params = dm.parameters();
        Adam& opt = *optimizers[di];
        EpochLoss acc;
        for (const auto& sb : schedule) {
          Tape tape;
          GraphBinding bind(tape);
          std::vector<Var> param_vars;
          for (Parameter* p : params) param_vars.push_back(bind(*p));

          Var loss_s;
          std::optional<Var> loss_a;
          std::vector<Var> projections;
          for (const PretextSample& sample : sb.samples) {
            const DimensionSlice input =
                DimensionSlice::from_sequence(sample.input, static_cast<Dim3>(di));
            const DimensionSlice target =
                DimensionSlice::from_sequence(sample.target, static_cast<Dim3>(di));
            EncodeResult enc = dm.encode(tape, bind, input);
            DecodeTrace trace = dm.decode_sequence(tape, bind, enc, sample, Phase::Train);
            Var ls = reconstruction_loss(tape, trace, target);
            loss_s = loss_s.valid() ? tape.add(loss_s, ls) : ls;
            if (mode == AttentionMode::LAS) {
              Var la = alignment_loss(tape, trace, mode);
              loss_a = loss_a ? tape.add(*loss_a, la) : la;
            }
            if (use_lcl) projections.push_back(tape.concat(trace.context));
          }
          const double inv_n = 1.0 / static_cast<double>(sb.samples.size());
          loss_s = tape.scale(loss_s, inv_n);
          if (loss_a) loss_a = tape.scale(*loss_a, inv_n);

          std::optional<Var> loss_c;
          if (use_lcl) {
            // pair layout: z_k = f_C(V_k) for k = 1..n-1, z_{k+n-1} = f_C(V_{k+1})
            std::vector<Var> projected(projections.size());
            for (std::size_t i = 0; i < projections.size(); ++i) {
              projected[i] = dm.projection().project(tape, bind, projections[i]);
            }
            std::vector<Var> z;
            for (int k = 0; k + 1 < static_cast<int>(projected.size()); ++k) z.push_back(projected[k]);
            for (int k = 0; k + 1 < static_cast<int>(projected.size()); ++k) z.push_back(projected[k + 1]);
            loss_c = lcl_loss(tape, z, cfg.tau);
          }

          Var total = total_loss(tape, loss_s, loss_a, loss_c, weights, param_vars);
          tape.backward(total);
          bind.accumulate_grads();
          opt.step(params);

          acc.ls += tape.value(loss_s)[0];
          if (loss_a) acc.la += tape.value(*loss_a)[0];
          if (loss_c) acc.lc += tape.value(*loss_c)[0];
          acc.total += tape.value(total)[0];
          ++step_idx;
        }
        const double inv_steps = 1.0 / static_cast<double>(schedule.size());
        epoch_losses[di] = {acc.ls * inv_steps, acc.la * inv_steps, acc.lc * inv_steps,
                            acc.total * inv_steps};
      } catch (const std::exception& e) {
        errors[di] = std::make_exception_ptr(std::runtime_error(
            std::string("dim ") + dim_name(static_cast<Dim3>(di)) + " epoch " +
            std::to_string(epoch) + " step " + std::to_string(step_idx) + ": " + e.what()));
      }
    };

    if (cfg.threads >= 3) {
      std::array<std::thread, 3> workers;
      for (int di = 0; di < 3; ++di) workers[di] = std::thread(run_dim, di);
      for (auto& w : workers) w.join();
    } else {
      for (int di = 0; di < 3; ++di) run_dim(di);
    }
    for (auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
    for (int di = 0; di < 3; ++di) result.curves[di].push_back(epoch_losses[di]);
  }
  return result;
}

}  // namespace gaitenc
