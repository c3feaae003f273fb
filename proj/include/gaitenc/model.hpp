#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gaitenc/autodiff.hpp"
#include "gaitenc/contrastive.hpp"
#include "gaitenc/lstm.hpp"
#include "gaitenc/parameter.hpp"
#include "gaitenc/skeleton.hpp"

namespace gaitenc {

enum class AttentionMode { None, BAS, MBAS, LAS };

inline const char* attention_name(AttentionMode m) {
  switch (m) {
    case AttentionMode::None: return "none";
    case AttentionMode::BAS: return "bas";
    case AttentionMode::MBAS: return "mbas";
    case AttentionMode::LAS: return "las";
  }
  return "?";
}

inline std::optional<AttentionMode> parse_attention(const std::string& s) {
  if (s == "none") return AttentionMode::None;
  if (s == "bas") return AttentionMode::BAS;
  if (s == "mbas") return AttentionMode::MBAS;
  if (s == "las") return AttentionMode::LAS;
  return std::nullopt;
}

struct LossWeights {
  double lambda_s = 1.0;
  double lambda_a = 0.5;
  double lambda_c = 0.5;
  double beta = 1e-4;
};

// Gaussian locality mask centered at the reconstruction-aligned position
// p_t = f - t + 1 with sigma = D/2; evaluated at every position, the window
// only sets the width. t is 1-based; entry j-1 holds l_t(j).
inline std::vector<double> locality_mask(int t, int f, int d_window) {
  if (t < 1 || t > f) throw std::invalid_argument("locality_mask: t out of range");
  if (d_window < 1) throw std::invalid_argument("locality_mask: D must be >= 1");
  const double sigma = d_window / 2.0;
  const int p = f - t + 1;
  std::vector<double> mask(f);
  for (int j = 1; j <= f; ++j) {
    const double dj = j - p;
    mask[j - 1] = std::exp(-dj * dj / (2.0 * sigma * sigma));
  }
  return mask;
}

// Per-step handles produced by one decode pass. Rows of `align` each sum
// to 1; `masked_align` is the mask-weighted row (on-graph for MBAS, a
// detached training target for LAS, absent otherwise).
struct DecodeTrace {
  std::vector<Var> encoded;       // h_1..h_f
  std::vector<Var> decoded;       // hhat_1..hhat_f
  std::vector<Var> align;         // a_t rows, length f each
  std::vector<Var> masked_align;  // atilde_t rows
  std::vector<Var> context;       // c_t
  std::vector<Var> attn_state;    // hbar_t
  std::vector<Var> outputs;       // Sbar_t, length J each
};

struct EncodeResult {
  std::vector<Var> states;  // h_1..h_f
  LstmState final;          // (h_f, c_f)
};

enum class Phase { Train, Test };

// One coordinate dimension of the gait model: encoder/decoder LSTMs, the
// attention concat layer W_att, the output layer W_F, and (when contrastive
// training is enabled) the projection head.
class GaitModelDim {
public:
  GaitModelDim(Dim3 dim, int f, int num_joints, int hidden, int d_window, AttentionMode mode,
               bool with_projection, int proj_hidden = 0)
      : dim_(dim),
        f_(f),
        j_(num_joints),
        k_(hidden),
        d_(d_window),
        mode_(mode),
        encoder_(std::string(1, dim_name(dim)) + ".enc", num_joints, hidden),
        decoder_(std::string(1, dim_name(dim)) + ".dec",
                 mode == AttentionMode::None ? num_joints : num_joints + hidden, hidden),
        w_f_(std::string(1, dim_name(dim)) + ".w_f", Tensor({num_joints, hidden})) {
    if (mode != AttentionMode::None) {
      w_att_.emplace(std::string(1, dim_name(dim)) + ".w_att", Tensor({hidden, 2 * hidden}));
    }
    if (with_projection) {
      const int in_width = f * hidden;
      const int h = proj_hidden > 0 ? proj_hidden : in_width / 2;
      proj_.emplace(std::string(1, dim_name(dim)), in_width, h, hidden);
    }
  }

  Dim3 dim() const { return dim_; }
  int f() const { return f_; }
  int num_joints() const { return j_; }
  int hidden() const { return k_; }
  int window() const { return d_; }
  double sigma() const { return d_ / 2.0; }
  AttentionMode mode() const { return mode_; }
  bool has_projection() const { return proj_.has_value(); }
  ProjectionHead& projection() {
    if (!proj_) throw std::logic_error("model was built without a projection head");
    return *proj_;
  }

  std::vector<Parameter*> parameters() {
    std::vector<Parameter*> out = encoder_.parameters();
    for (Parameter* p : decoder_.parameters()) out.push_back(p);
    if (w_att_) out.push_back(&*w_att_);
    out.push_back(&w_f_);
    if (proj_) {
      for (Parameter* p : proj_->parameters()) out.push_back(p);
    }
    return out;
  }

  void init(std::uint64_t seed) {
    encoder_.init(seed);
    decoder_.init(seed);
    if (w_att_) init_uniform(*w_att_, 1.0 / std::sqrt(2.0 * k_), seed);
    init_uniform(w_f_, 1.0 / std::sqrt(static_cast<double>(k_)), seed);
    if (proj_) proj_->init(seed);
  }

  // Folds the f input skeletons into the encoded gait states h_1..h_f.
  EncodeResult encode(Tape& tape, GraphBinding& bind, const DimensionSlice& slice) {
    if (slice.values.rows() != f_ || slice.values.cols() != j_) {
      throw std::invalid_argument("encode: slice shape " + slice.values.shape_str() +
                                  " does not match f=" + std::to_string(f_) +
                                  " J=" + std::to_string(j_));
    }
    EncodeResult result;
    LstmState state = lstm_zero_state(tape, k_);
    for (int t = 0; t < f_; ++t) {
      Var input = tape.leaf(Tensor({j_}, slice.row(t)));
      state = lstm_step(tape, bind, encoder_, input, state);
      result.states.push_back(state.hidden);
    }
    result.final = state;
    return result;
  }

  // Decoding with attention. The auxiliary input x_{t-1} is the previous target skeleton
  // when teacher forcing applies (train phase, ground-truth aux rule) and the
  // previous model output otherwise. Step 1 consumes the zero skeleton and,
  // with attention, a zero attentional state.
  DecodeTrace decode_sequence(Tape& tape, GraphBinding& bind, const EncodeResult& encoded,
                              const PretextSample& pretext, Phase phase) {
    const DimensionSlice target = DimensionSlice::from_sequence(pretext.target, dim_);
    if (static_cast<int>(encoded.states.size()) != f_) {
      throw std::invalid_argument("decode_sequence: expected " + std::to_string(f_) +
                                  " encoded states");
    }
    const bool teacher_forcing =
        phase == Phase::Train && pretext.aux_rule == AuxRule::GroundTruthTarget;

    DecodeTrace trace;
    trace.encoded = encoded.states;
    LstmState state{encoded.final.hidden, encoded.final.cell};
    Var prev_attn;  // hbar_{t-1}
    for (int t = 1; t <= f_; ++t) {
      Var aux;
      if (t == 1) {
        aux = tape.zeros({j_});  // all-zero skeleton placeholder
      } else if (teacher_forcing) {
        aux = tape.leaf(Tensor({j_}, target.row(t - 2)));
      } else {
        aux = trace.outputs[t - 2];
      }

      Var input = aux;
      if (mode_ != AttentionMode::None) {
        Var attn_feed = (t == 1) ? tape.zeros({k_}) : prev_attn;
        input = tape.concat({aux, attn_feed});
      }
      state = lstm_step(tape, bind, decoder_, input, state);
      Var hhat = state.hidden;
      trace.decoded.push_back(hhat);

      if (mode_ == AttentionMode::None) {
        trace.outputs.push_back(tape.matvec(bind(w_f_), hhat));
        continue;
      }

      // alignment scores of the decoded state against all encoded states
      std::vector<Var> scores(f_);
      for (int j = 0; j < f_; ++j) scores[j] = tape.dot(hhat, encoded.states[j]);
      Var a_row = tape.softmax(tape.concat(scores));
      trace.align.push_back(a_row);

      Var weights = a_row;
      if (mode_ == AttentionMode::MBAS || mode_ == AttentionMode::LAS) {
        // mask-weighted row; MBAS attends with it, LAS keeps it as the
        // alignment-loss target while attending with the raw row
        Var mask = tape.leaf(Tensor({f_}, locality_mask(t, f_, d_)));
        Var masked = tape.mul(a_row, mask);
        trace.masked_align.push_back(masked);
        if (mode_ == AttentionMode::MBAS) weights = masked;
      }

      // context vector: weighted sum of the encoded states
      Var context = tape.weighted_sum(weights, encoded.states);
      trace.context.push_back(context);

      // attentional state from [context; decoded], then joint coordinates
      Var hbar = tape.tanh(tape.matvec(bind(*w_att_), tape.concat({context, hhat})));
      trace.attn_state.push_back(hbar);
      prev_attn = hbar;
      trace.outputs.push_back(tape.matvec(bind(w_f_), hbar));
    }
    return trace;
  }

  // Mean attention matrix of a decoded trace (f x f, rows sum to 1).
  Tensor attention_matrix(const Tape& tape, const DecodeTrace& trace) const {
    Tensor m({f_, f_});
    for (int t = 0; t < static_cast<int>(trace.align.size()); ++t) {
      const Tensor& row = tape.value(trace.align[t]);
      for (int j = 0; j < f_; ++j) m.at(t, j) = row[j];
    }
    return m;
  }

private:
  Dim3 dim_;
  int f_, j_, k_, d_;
  AttentionMode mode_;
  LstmCellParams encoder_;
  LstmCellParams decoder_;
  std::optional<Parameter> w_att_;
  Parameter w_f_;
  std::optional<ProjectionHead> proj_;
};

// Summed squared error between decoded outputs and the target slice.
inline Var reconstruction_loss(Tape& tape, const DecodeTrace& trace,
                               const DimensionSlice& target) {
  if (static_cast<int>(trace.outputs.size()) != target.values.rows()) {
    throw std::invalid_argument("reconstruction_loss: trace/target length mismatch");
  }
  Var total;
  for (std::size_t t = 0; t < trace.outputs.size(); ++t) {
    Var row = tape.leaf(Tensor({target.values.cols()}, target.row(static_cast<int>(t))));
    Var term = tape.mse_sum(trace.outputs[t], row);
    total = total.valid() ? tape.add(total, term) : term;
  }
  return total;
}

// One row of the alignment loss: sum_j (a_t(j) - atilde_t(j))^2.
inline Var alignment_loss_row(Tape& tape, Var a_row, Var masked_row) {
  return tape.sum_sq(tape.sub(a_row, masked_row));
}

// Alignment loss over the whole trace. Only valid for LAS, where masked_align holds
// the l_t * a_t rows. The loss is differentiable through both terms; since
// (a - l*a) = a*(1-l) pointwise, minimizing it moves alignment mass into
// the window rather than matching a hard mask.
inline Var alignment_loss(Tape& tape, const DecodeTrace& trace, AttentionMode mode) {
  if (mode != AttentionMode::LAS) {
    throw std::invalid_argument("alignment_loss: requires LAS attention mode");
  }
  if (trace.align.size() != trace.masked_align.size()) {
    throw std::invalid_argument("alignment_loss: trace is missing masked rows");
  }
  Var total;
  for (std::size_t t = 0; t < trace.align.size(); ++t) {
    Var term = tape.sum_sq(tape.sub(trace.align[t], trace.masked_align[t]));
    total = total.valid() ? tape.add(total, term) : term;
  }
  return total;
}

// Combined objective: weighted loss terms plus L2 over the bound parameters.
inline Var total_loss(Tape& tape, Var loss_s, std::optional<Var> loss_a,
                      std::optional<Var> loss_c, const LossWeights& w,
                      const std::vector<Var>& parameter_vars) {
  if (w.lambda_s < 0 || w.lambda_a < 0 || w.lambda_c < 0 || w.beta < 0) {
    throw std::invalid_argument("total_loss: weights must be nonnegative");
  }
  Var total = tape.scale(loss_s, w.lambda_s);
  if (loss_a) total = tape.add(total, tape.scale(*loss_a, w.lambda_a));
  if (loss_c) total = tape.add(total, tape.scale(*loss_c, w.lambda_c));
  if (w.beta > 0 && !parameter_vars.empty()) {
    Var reg;
    for (Var p : parameter_vars) {
      Var sq = tape.sum_sq(p);
      reg = reg.valid() ? tape.add(reg, sq) : sq;
    }
    total = tape.add(total, tape.scale(reg, w.beta));
  }
  return total;
}

}  // namespace gaitenc
