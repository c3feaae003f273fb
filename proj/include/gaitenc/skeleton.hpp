#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gaitenc/rng.hpp"
#include "gaitenc/tensor.hpp"

namespace gaitenc {

// One skeleton: J body joints, 3D coordinates in meters.
struct SkeletonFrame {
  std::vector<std::array<double, 3>> joints;

  int num_joints() const { return static_cast<int>(joints.size()); }

  bool all_finite() const {
    for (const auto& j : joints) {
      for (double v : j) {
        if (!std::isfinite(v)) return false;
      }
    }
    return true;
  }
};

// Fixed-length window of frames cut from one recording. seq_index counts
// windows within the recording; consecutive seq_index values are temporally
// adjacent windows. start_frame is the window's offset into the trimmed
// recording.
struct SkeletonSequence {
  std::vector<SkeletonFrame> frames;
  int identity = 0;  // 1..C, 0 when unknown
  int recording = 0;
  int seq_index = 0;
  int start_frame = 0;

  int length() const { return static_cast<int>(frames.size()); }
  int num_joints() const { return frames.empty() ? 0 : frames[0].num_joints(); }
};

enum class Dim3 { X = 0, Y = 1, Z = 2 };

inline char dim_name(Dim3 d) { return "XYZ"[static_cast<int>(d)]; }

// f x J matrix holding one coordinate axis of a sequence.
struct DimensionSlice {
  Dim3 dim = Dim3::X;
  Tensor values;  // f x J

  static DimensionSlice from_sequence(const SkeletonSequence& seq, Dim3 d) {
    const int f = seq.length(), j = seq.num_joints();
    DimensionSlice s{d, Tensor({f, j})};
    for (int t = 0; t < f; ++t) {
      for (int jj = 0; jj < j; ++jj) {
        s.values.at(t, jj) = seq.frames[t].joints[jj][static_cast<int>(d)];
      }
    }
    return s;
  }

  std::vector<double> row(int t) const {
    const int j = values.cols();
    std::vector<double> out(j);
    for (int c = 0; c < j; ++c) out[c] = values.at(t, c);
    return out;
  }
};

enum class PretextTask {
  ReverseReconstruction,
  PlainReconstruction,
  Prediction,
  HalfPrediction,
  Sorting,
};

enum class AuxRule { GroundTruthTarget, ModelOutput };

inline const char* task_name(PretextTask t) {
  switch (t) {
    case PretextTask::ReverseReconstruction: return "revrec";
    case PretextTask::PlainReconstruction: return "plain";
    case PretextTask::Prediction: return "pred";
    case PretextTask::HalfPrediction: return "halfpred";
    case PretextTask::Sorting: return "sort";
  }
  return "?";
}

inline std::optional<PretextTask> parse_task(const std::string& s) {
  if (s == "revrec") return PretextTask::ReverseReconstruction;
  if (s == "plain") return PretextTask::PlainReconstruction;
  if (s == "pred") return PretextTask::Prediction;
  if (s == "halfpred") return PretextTask::HalfPrediction;
  if (s == "sort") return PretextTask::Sorting;
  return std::nullopt;
}

// Input/target pair for one self-supervised training instance.
struct PretextSample {
  SkeletonSequence input;
  SkeletonSequence target;
  PretextTask task = PretextTask::ReverseReconstruction;
  AuxRule aux_rule = AuxRule::GroundTruthTarget;
  std::optional<std::vector<int>> shuffle_indices;  // Sorting only; input[t] = target[r_t]
};

// build_pretext outcome: either a sample or the reason the window was skipped.
struct PretextResult {
  std::optional<PretextSample> sample;
  std::string skip_reason;

  bool ok() const { return sample.has_value(); }
};

// Raw recording as stored on disk; identity labels are 1..C.
struct Recording {
  int identity = 0;
  int rec = 0;
  std::vector<SkeletonFrame> frames;
};

enum class SplitPhase { Train, Test };
enum class SplitRole { None, Gallery, Probe };

struct SplitTag {
  SplitPhase phase = SplitPhase::Train;
  SplitRole role = SplitRole::None;
  std::string condition;  // e.g. Nm / Bg / Cl; empty when untagged
};

struct IdentityEntry {
  int label = 0;
  int recordings = 0;
};

struct DatasetManifest {
  int num_joints = 0;
  int sequence_length = 0;
  std::vector<IdentityEntry> identities;
  std::string recordings_file;                  // path relative to the manifest
  std::map<std::pair<int, int>, SplitTag> splits;  // (identity, rec) -> tag
  int center_root_joint = -1;                   // -1: raw coordinates

  SplitTag split_for(int identity, int rec) const {
    auto it = splits.find({identity, rec});
    return it == splits.end() ? SplitTag{} : it->second;
  }
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<Recording> recordings;

  int num_identities() const { return static_cast<int>(manifest.identities.size()); }
};

// Sliding-window split: drop head_tail_discard frames from both ends, then
// cut length-f windows advancing by `step`. Window w starts at trimmed
// position w*step and gets seq_index w.
inline std::vector<SkeletonSequence> split_recording(const Recording& recording, int f,
                                                     int head_tail_discard, int step) {
  if (f < 1) throw std::invalid_argument("split_recording: f must be >= 1");
  if (step < 1) throw std::invalid_argument("split_recording: step must be >= 1");
  if (head_tail_discard < 0) throw std::invalid_argument("split_recording: negative discard");
  const int total = static_cast<int>(recording.frames.size());
  const int retained = total - 2 * head_tail_discard;
  if (retained < f) {
    throw std::runtime_error("insufficient frames in recording id=" +
                             std::to_string(recording.identity) + " rec=" +
                             std::to_string(recording.rec) + ": " + std::to_string(total) +
                             " frames, " + std::to_string(retained < 0 ? 0 : retained) +
                             " retained after trimming, need >= " + std::to_string(f));
  }
  const int count = (retained - f) / step + 1;
  std::vector<SkeletonSequence> out;
  out.reserve(count);
  for (int w = 0; w < count; ++w) {
    SkeletonSequence seq;
    seq.identity = recording.identity;
    seq.recording = recording.rec;
    seq.seq_index = w;
    seq.start_frame = w * step;
    const int begin = head_tail_discard + w * step;
    seq.frames.assign(recording.frames.begin() + begin, recording.frames.begin() + begin + f);
    out.push_back(std::move(seq));
  }
  return out;
}

inline std::vector<SkeletonFrame> trimmed_frames(const Recording& recording,
                                                 int head_tail_discard) {
  const int total = static_cast<int>(recording.frames.size());
  const int retained = total - 2 * head_tail_discard;
  if (retained < 0) return {};
  return {recording.frames.begin() + head_tail_discard,
          recording.frames.begin() + head_tail_discard + retained};
}

// Builds the (input, target, aux rule) triple for one window.
//   ReverseReconstruction: target[t] = input[f-t+1]; teacher-forced aux input.
//   PlainReconstruction:   target == input; teacher-forced aux input.
//   Prediction:            target = next f frames of the recording; model-output aux.
//   HalfPrediction:        target = frames f/2+1 .. 3f/2 of the window; model-output aux.
//   Sorting:               input = shuffle of target; model-output aux.
// `recording_frames` is the trimmed source recording the window was cut from;
// prediction variants read their future frames out of it and skip (with a
// reason) when the recording ends too early.
inline PretextResult build_pretext(PretextTask task, const SkeletonSequence& seq,
                                   std::span<const SkeletonFrame> recording_frames,
                                   Rng* rng = nullptr) {
  const int f = seq.length();
  PretextSample sample;
  sample.task = task;
  sample.input = seq;
  sample.target = seq;

  auto future = [&](int offset, int count) -> std::optional<std::vector<SkeletonFrame>> {
    const int begin = seq.start_frame + offset;
    if (begin + count > static_cast<int>(recording_frames.size())) return std::nullopt;
    return std::vector<SkeletonFrame>(recording_frames.begin() + begin,
                                      recording_frames.begin() + begin + count);
  };

  switch (task) {
    case PretextTask::ReverseReconstruction:
      sample.aux_rule = AuxRule::GroundTruthTarget;
      for (int t = 0; t < f; ++t) sample.target.frames[t] = seq.frames[f - 1 - t];
      break;
    case PretextTask::PlainReconstruction:
      sample.aux_rule = AuxRule::GroundTruthTarget;
      break;
    case PretextTask::Prediction: {
      sample.aux_rule = AuxRule::ModelOutput;
      auto frames = future(f, f);
      if (!frames) {
        return {std::nullopt, "prediction target needs " + std::to_string(f) +
                                  " future frames past window at seq_index " +
                                  std::to_string(seq.seq_index)};
      }
      sample.target.frames = std::move(*frames);
      break;
    }
    case PretextTask::HalfPrediction: {
      if (f % 2 != 0) throw std::invalid_argument("half-prediction requires even f");
      sample.aux_rule = AuxRule::ModelOutput;
      auto frames = future(f / 2, f);
      if (!frames) {
        return {std::nullopt, "half-prediction target needs " + std::to_string(f / 2) +
                                  " future frames past window at seq_index " +
                                  std::to_string(seq.seq_index)};
      }
      sample.target.frames = std::move(*frames);
      break;
    }
    case PretextTask::Sorting: {
      if (rng == nullptr) throw std::invalid_argument("sorting requires an rng");
      sample.aux_rule = AuxRule::ModelOutput;
      std::vector<int> perm = rng->permutation(f);
      for (int t = 0; t < f; ++t) sample.input.frames[t] = seq.frames[perm[t]];
      sample.shuffle_indices = std::move(perm);
      break;
    }
  }
  return {std::move(sample), ""};
}

}  // namespace gaitenc
