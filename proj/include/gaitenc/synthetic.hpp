#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <set>
#include <tuple>
#include <stdexcept>
#include <string>
#include <vector>

#include "gaitenc/rng.hpp"
#include "gaitenc/skeleton.hpp"

namespace gaitenc {

// Per-identity walking-style parameters. Frequency is 1/period_frames cycles
// per frame; with zero noise a recording repeats bit-exactly every period.
struct GaitIdentityParams {
  double stride = 0.3;     // swing amplitude in meters
  int period_frames = 12;  // full gait cycle length
  double phase = 0.0;      // cycle offset in radians
};

struct SyntheticSpec {
  int identities = 5;
  int recordings_per_identity = 4;
  int frames_per_recording = 60;
  int num_joints = 5;
  double noise = 0.01;
  std::uint64_t seed = 0;
  std::vector<GaitIdentityParams> params;  // optional; derived from seed when empty
};

namespace detail {

// Fixed body layout: joint 0 is the pelvis root; remaining joints alternate
// between limb-like (full swing, alternating phase) and torso-like points.
struct JointLayout {
  std::array<double, 3> base;
  double swing_scale;
  double phase_offset;
};

inline std::vector<JointLayout> joint_layout(int num_joints) {
  std::vector<JointLayout> layout(num_joints);
  for (int j = 0; j < num_joints; ++j) {
    const double side = (j % 2 == 0) ? 1.0 : -1.0;
    const double height = 1.0 - 0.35 * ((j + 1) / 2 % 3);
    layout[j].base = {0.15 * side * ((j + 1) / 2), height, 0.0};
    layout[j].swing_scale = (j == 0) ? 0.15 : 0.5 + 0.5 * (j % 3) / 2.0;
    layout[j].phase_offset = (j % 2 == 0) ? 0.0 : std::numbers::pi;
  }
  return layout;
}

}  // namespace detail

inline std::vector<GaitIdentityParams> derive_gait_params(int identities, std::uint64_t seed) {
  Rng rng(seed_mix(seed, fnv1a("gait-params")));
  std::vector<GaitIdentityParams> params(identities);
  for (int i = 0; i < identities; ++i) {
    params[i].stride = 0.22 + 0.08 * (i % 5) + 0.01 * rng.uniform();
    params[i].period_frames = 8 + 2 * (i % 7);
    params[i].phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }
  return params;
}

// Deterministic sinusoidal walker. Same spec (including seed) gives an
// identical dataset; identities differ in (stride, period, phase).
inline Dataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.identities < 1) throw std::invalid_argument("generate_synthetic: identities >= 1");
  if (spec.recordings_per_identity < 1) {
    throw std::invalid_argument("generate_synthetic: recordings_per_identity >= 1");
  }
  if (spec.frames_per_recording < 1) {
    throw std::invalid_argument("generate_synthetic: frames_per_recording >= 1");
  }
  if (spec.num_joints < 2) throw std::invalid_argument("generate_synthetic: num_joints >= 2");

  std::vector<GaitIdentityParams> params =
      spec.params.empty() ? derive_gait_params(spec.identities, spec.seed) : spec.params;
  if (static_cast<int>(params.size()) != spec.identities) {
    throw std::invalid_argument("generate_synthetic: params size != identities");
  }
  {
    std::set<std::tuple<double, int, double>> seen;
    for (const auto& p : params) {
      if (!seen.insert({p.stride, p.period_frames, p.phase}).second) {
        throw std::invalid_argument("generate_synthetic: duplicate identity parameter tuple");
      }
      if (p.period_frames < 2) throw std::invalid_argument("generate_synthetic: period >= 2");
    }
  }

  const auto layout = detail::joint_layout(spec.num_joints);
  Dataset ds;
  ds.manifest.num_joints = spec.num_joints;
  for (int i = 0; i < spec.identities; ++i) {
    ds.manifest.identities.push_back({i + 1, spec.recordings_per_identity});
  }

  for (int id = 1; id <= spec.identities; ++id) {
    const GaitIdentityParams& gp = params[id - 1];
    for (int rec = 0; rec < spec.recordings_per_identity; ++rec) {
      Rng rng(seed_mix(spec.seed, fnv1a("rec-" + std::to_string(id) + "-" + std::to_string(rec))));
      // each recording starts at a different point of the gait cycle
      const double rec_phase = gp.phase + rng.uniform(0.0, 2.0 * std::numbers::pi);
      Recording r;
      r.identity = id;
      r.rec = rec;
      r.frames.resize(spec.frames_per_recording);
      // cadence jitter: a random-walk phase drift scaled by the noise level,
      // so temporally close frames stay more correlated than distant ones;
      // zero noise keeps recordings exactly periodic
      double drift = 0.0;
      for (int t = 0; t < spec.frames_per_recording; ++t) {
        SkeletonFrame& frame = r.frames[t];
        frame.joints.resize(spec.num_joints);
        drift += rng.normal(0.0, spec.noise * 2.0);
        const double cycle =
            2.0 * std::numbers::pi * static_cast<double>(t % gp.period_frames) / gp.period_frames;
        for (int j = 0; j < spec.num_joints; ++j) {
          const auto& jl = layout[j];
          const double arg = cycle + rec_phase + jl.phase_offset + drift;
          const double swing = gp.stride * jl.swing_scale;
          frame.joints[j][0] = jl.base[0] + swing * std::sin(arg);
          frame.joints[j][1] = jl.base[1] + 0.2 * swing * std::cos(2.0 * arg);
          frame.joints[j][2] = jl.base[2] + 0.3 * swing * std::sin(arg + std::numbers::pi / 2);
          if (spec.noise > 0.0) {
            for (int d = 0; d < 3; ++d) frame.joints[j][d] += rng.normal(0.0, spec.noise);
          }
        }
      }
      ds.recordings.push_back(std::move(r));
    }
  }
  return ds;
}

// Tags the last `probe_per_id` recordings of each identity as test/probe and
// the `gallery_per_id` before them as test/gallery; the rest train.
inline void assign_default_splits(Dataset& ds, int gallery_per_id, int probe_per_id) {
  for (const auto& id : ds.manifest.identities) {
    if (id.recordings < gallery_per_id + probe_per_id + 1) {
      throw std::invalid_argument("identity " + std::to_string(id.label) +
                                  " has too few recordings for requested splits");
    }
    const int first_gallery = id.recordings - gallery_per_id - probe_per_id;
    const int first_probe = id.recordings - probe_per_id;
    for (int rec = 0; rec < id.recordings; ++rec) {
      SplitTag tag;
      if (rec >= first_probe) {
        tag.phase = SplitPhase::Test;
        tag.role = SplitRole::Probe;
      } else if (rec >= first_gallery) {
        tag.phase = SplitPhase::Test;
        tag.role = SplitRole::Gallery;
      }
      ds.manifest.splits[{id.label, rec}] = tag;
    }
  }
}

}  // namespace gaitenc
