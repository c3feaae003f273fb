#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "gaitenc/autodiff.hpp"
#include "gaitenc/optimizer.hpp"
#include "gaitenc/rng.hpp"
#include "gaitenc/skeleton.hpp"
#include "gaitenc/train.hpp"

namespace gaitenc {

enum class EncodingVariant { AGE, CAGE };
enum class EncodingLevel { Skeleton, Sequence };

inline const char* variant_name(EncodingVariant v) {
  return v == EncodingVariant::AGE ? "AGE" : "CAGE";
}

// Attention-based gait encoding of one sequence. The sequence-level vector
// is the ordered concatenation of the f skeleton-level vectors, so
// skeleton-level views are slices of it.
struct GaitEncoding {
  int identity = 0;
  int recording = 0;
  int seq_index = 0;
  int frames = 0;  // f
  EncodingLevel level = EncodingLevel::Sequence;
  EncodingVariant variant = EncodingVariant::AGE;
  std::vector<PretextTask> provenance;
  std::vector<double> vec;

  int per_frame_width() const { return frames > 0 ? static_cast<int>(vec.size()) / frames : 0; }

  std::span<const double> skeleton(int t) const {
    const int w = per_frame_width();
    return {vec.data() + static_cast<std::size_t>(t) * w, static_cast<std::size_t>(w)};
  }
};

// Runs test-style decoding (auxiliary input = model output) and collects the
// per-step context vectors of the three dimensions: skeleton-level vector
// v_t = [cX_t; cY_t; cZ_t].
inline GaitEncoding extract_encoding(GaitModel& model, const SkeletonSequence& seq,
                                     EncodingVariant variant, PretextTask provenance_task) {
  if (model.mode() == AttentionMode::None) {
    throw std::invalid_argument(
        "extract_encoding: context vectors are undefined without attention");
  }
  if (seq.num_joints() != model.num_joints()) {
    throw std::invalid_argument("extract_encoding: sequence has " +
                                std::to_string(seq.num_joints()) + " joints, model expects " +
                                std::to_string(model.num_joints()));
  }
  if (seq.length() != model.f()) {
    throw std::invalid_argument("extract_encoding: sequence length != model f");
  }
  const int f = model.f(), k = model.hidden();

  // reverse-reconstruction shaped decode; the target is unused in test phase
  PretextResult pr = build_pretext(PretextTask::ReverseReconstruction, seq, {}, nullptr);

  GaitEncoding enc;
  enc.identity = seq.identity;
  enc.recording = seq.recording;
  enc.seq_index = seq.seq_index;
  enc.frames = f;
  enc.variant = variant;
  enc.provenance = {provenance_task};
  enc.vec.assign(static_cast<std::size_t>(3) * k * f, 0.0);

  for (Dim3 d : {Dim3::X, Dim3::Y, Dim3::Z}) {
    GaitModelDim& dm = model.dim(d);
    Tape tape;
    GraphBinding bind(tape);
    const DimensionSlice slice = DimensionSlice::from_sequence(seq, d);
    EncodeResult er = dm.encode(tape, bind, slice);
    DecodeTrace trace = dm.decode_sequence(tape, bind, er, *pr.sample, Phase::Test);
    for (int t = 0; t < f; ++t) {
      const Tensor& c = tape.value(trace.context[t]);
      double* dst = enc.vec.data() + static_cast<std::size_t>(t) * 3 * k +
                    static_cast<std::size_t>(d) * k;
      for (int i = 0; i < k; ++i) dst[i] = c[i];
    }
  }
  return enc;
}

inline std::vector<GaitEncoding> extract_encodings(GaitModel& model,
                                                   std::span<const SkeletonSequence> seqs,
                                                   EncodingVariant variant,
                                                   PretextTask provenance_task) {
  std::vector<GaitEncoding> out;
  out.reserve(seqs.size());
  for (const SkeletonSequence& s : seqs) {
    out.push_back(extract_encoding(model, s, variant, provenance_task));
  }
  return out;
}

// Per-skeleton concatenation of encodings of the same sequences learned
// under different pretext tasks, in canonical task order (the PretextTask
// declaration order), whatever order the inputs arrive in.
inline std::vector<GaitEncoding> fuse_encodings(std::vector<std::vector<GaitEncoding>> per_task) {
  if (per_task.empty()) throw std::invalid_argument("fuse_encodings: no inputs");
  if (per_task.size() == 1) return per_task.front();

  std::sort(per_task.begin(), per_task.end(), [](const auto& a, const auto& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("fuse_encodings: empty input set");
    return static_cast<int>(a.front().provenance.front()) <
           static_cast<int>(b.front().provenance.front());
  });

  using Key = std::tuple<int, int, int>;
  auto key_of = [](const GaitEncoding& e) { return Key{e.identity, e.recording, e.seq_index}; };
  std::map<Key, std::vector<const GaitEncoding*>> groups;
  for (const auto& task_set : per_task) {
    for (const auto& e : task_set) groups[key_of(e)].push_back(&e);
  }

  std::vector<GaitEncoding> fused;
  for (auto& [key, parts] : groups) {
    if (parts.size() != per_task.size()) {
      throw std::invalid_argument("fuse_encodings: sequence id=" + std::to_string(std::get<0>(key)) +
                                  " rec=" + std::to_string(std::get<1>(key)) + " seq=" +
                                  std::to_string(std::get<2>(key)) +
                                  " is missing from one of the task sets");
    }
    const int f = parts.front()->frames;
    GaitEncoding out = *parts.front();
    out.provenance.clear();
    out.vec.clear();
    for (const GaitEncoding* p : parts) {
      if (p->frames != f) throw std::invalid_argument("fuse_encodings: frame count mismatch");
      out.provenance.push_back(p->provenance.front());
      if (p->variant == EncodingVariant::AGE) out.variant = EncodingVariant::AGE;
    }
    for (int t = 0; t < f; ++t) {
      for (const GaitEncoding* p : parts) {
        auto sk = p->skeleton(t);
        out.vec.insert(out.vec.end(), sk.begin(), sk.end());
      }
    }
    fused.push_back(std::move(out));
  }
  return fused;
}

enum class ReidStrategy { AP, SC };

inline const char* strategy_name(ReidStrategy s) { return s == ReidStrategy::AP ? "ap" : "sc"; }

// Hidden layer + softmax layer over frozen gait encodings. Input width is
// the skeleton-level width for AP and the sequence-level width for SC.
class RecognitionNet {
public:
  RecognitionNet(int input_width, int hidden, int classes)
      : input_width_(input_width),
        hidden_(hidden),
        classes_(classes),
        w1_("rn.w1", Tensor({hidden, input_width})),
        b1_("rn.b1", Tensor({hidden})),
        w2_("rn.w2", Tensor({classes, hidden})),
        b2_("rn.b2", Tensor({classes})) {}

  int input_width() const { return input_width_; }
  int classes() const { return classes_; }

  std::vector<Parameter*> parameters() { return {&w1_, &b1_, &w2_, &b2_}; }

  void init(std::uint64_t seed) {
    init_uniform(w1_, 1.0 / std::sqrt(static_cast<double>(input_width_)), seed);
    init_uniform(w2_, 1.0 / std::sqrt(static_cast<double>(hidden_)), seed);
    init_constant(b1_, 0.0);
    init_constant(b2_, 0.0);
  }

  // plain forward for inference
  std::vector<double> probabilities(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != input_width_) {
      throw std::invalid_argument("recognizer: input width " + std::to_string(x.size()) +
                                  " != expected " + std::to_string(input_width_));
    }
    std::vector<double> h(hidden_);
    for (int r = 0; r < hidden_; ++r) {
      double s = b1_.value[r];
      const double* row = w1_.value.data().data() + static_cast<std::size_t>(r) * input_width_;
      for (int c = 0; c < input_width_; ++c) s += row[c] * x[c];
      h[r] = s > 0.0 ? s : 0.0;
    }
    std::vector<double> logits(classes_);
    double mx = -1e300;
    for (int r = 0; r < classes_; ++r) {
      double s = b2_.value[r];
      const double* row = w2_.value.data().data() + static_cast<std::size_t>(r) * hidden_;
      for (int c = 0; c < hidden_; ++c) s += row[c] * h[c];
      logits[r] = s;
      mx = std::max(mx, s);
    }
    double z = 0.0;
    for (double& l : logits) {
      l = std::exp(l - mx);
      z += l;
    }
    for (double& l : logits) l /= z;
    return logits;
  }

  // tape forward for training
  Var loss_on(Tape& tape, GraphBinding& bind, std::span<const double> x, int label_index) {
    Var input = tape.leaf(Tensor({input_width_}, std::vector<double>(x.begin(), x.end())));
    Var h = tape.relu(tape.add(tape.matvec(bind(w1_), input), bind(b1_)));
    Var logits = tape.add(tape.matvec(bind(w2_), h), bind(b2_));
    return tape.sub(tape.logsumexp(logits), tape.index(logits, label_index));
  }

private:
  int input_width_, hidden_, classes_;
  Parameter w1_, b1_, w2_, b2_;
};

struct RecognizerConfig {
  int hidden = 256;
  int epochs = 60;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  int batch = 16;
};

// Cross-entropy training on frozen encodings with minibatch-averaged
// gradients. AP trains on skeleton-level slices (each frame inherits the
// sequence label); SC on sequence-level vectors. Encodings are read-only
// throughout.
inline RecognitionNet train_recognizer(std::span<const GaitEncoding> encodings, int classes,
                                       ReidStrategy strategy, const RecognizerConfig& cfg) {
  if (encodings.empty()) throw std::invalid_argument("train_recognizer: no encodings");
  for (const auto& e : encodings) {
    if (e.identity < 1 || e.identity > classes) {
      throw std::invalid_argument("train_recognizer: label " + std::to_string(e.identity) +
                                  " outside 1.." + std::to_string(classes));
    }
  }
  const int width = strategy == ReidStrategy::AP
                        ? encodings.front().per_frame_width()
                        : static_cast<int>(encodings.front().vec.size());

  RecognitionNet net(width, cfg.hidden, classes);
  net.init(cfg.seed);
  Adam opt({cfg.lr, 0.9, 0.999, 1e-8, 5.0});
  std::vector<Parameter*> params = net.parameters();

  struct Sample {
    const GaitEncoding* enc;
    int frame;  // -1 for sequence-level
  };
  std::vector<Sample> samples;
  for (const auto& e : encodings) {
    if (strategy == ReidStrategy::AP) {
      for (int t = 0; t < e.frames; ++t) samples.push_back({&e, t});
    } else {
      samples.push_back({&e, -1});
    }
  }

  const int batch = std::max(1, cfg.batch);
  Rng root(seed_mix(cfg.seed, fnv1a("recognizer")));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng epoch_rng = root.fork("epoch-" + std::to_string(epoch));
    std::vector<int> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    epoch_rng.shuffle(order);
    for (std::size_t begin = 0; begin < order.size(); begin += batch) {
      const std::size_t end = std::min(order.size(), begin + batch);
      Tape tape;
      GraphBinding bind(tape);
      Var loss;
      for (std::size_t i = begin; i < end; ++i) {
        const Sample& s = samples[order[i]];
        std::span<const double> x = s.frame >= 0
                                        ? s.enc->skeleton(s.frame)
                                        : std::span<const double>(s.enc->vec);
        Var term = net.loss_on(tape, bind, x, s.enc->identity - 1);
        loss = loss.valid() ? tape.add(loss, term) : term;
      }
      loss = tape.scale(loss, 1.0 / static_cast<double>(end - begin));
      tape.backward(loss);
      bind.accumulate_grads();
      opt.step(params);
    }
  }
  return net;
}

// AP: mean of the f skeleton-level predictions. SC: one sequence-level
// prediction. Both return a distribution over the C classes.
inline std::vector<double> predict_sequence(const RecognitionNet& net, const GaitEncoding& enc,
                                            ReidStrategy strategy) {
  if (strategy == ReidStrategy::SC) {
    return net.probabilities(enc.vec);
  }
  if (net.input_width() != enc.per_frame_width()) {
    throw std::invalid_argument("predict_sequence: AP width mismatch");
  }
  std::vector<double> mean(net.classes(), 0.0);
  for (int t = 0; t < enc.frames; ++t) {
    std::vector<double> p = net.probabilities(enc.skeleton(t));
    for (int c = 0; c < net.classes(); ++c) mean[c] += p[c];
  }
  for (double& v : mean) v /= enc.frames;
  return mean;
}

}  // namespace gaitenc
