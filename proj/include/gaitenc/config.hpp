#pragma once

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gaitenc/model.hpp"
#include "gaitenc/optimizer.hpp"
#include "gaitenc/skeleton.hpp"

namespace gaitenc {

// Every experiment knob in one place. Defaults are the library defaults;
// the CLI overlays config-file values and then command-line flags.
struct RunConfig {
  // data
  std::string dataset;
  std::string out = "out";
  int f = 6;
  int num_joints = 5;
  int head_tail_discard = 10;
  int step = 0;  // 0 -> f/2

  // model
  int hidden = 128;  // K
  int window = 2;    // D
  std::string attention = "las";
  std::string task = "revrec";  // comma-separated list trains one model per task

  // losses / contrastive
  double lambda_s = 1.0;
  double lambda_a = 0.5;
  double lambda_c = 0.5;
  double beta = 1e-4;
  double tau = 0.1;
  int batch = 4;     // n sequences per contrastive batch
  int interval = 1;  // positive-pair seq_index gap
  int proj_hidden = 0;  // 0 -> f*K/2

  // optimizer / schedule
  double lr = 5e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double clip_norm = 5.0;
  int epochs = 50;
  std::uint64_t seed = 0;
  int threads = 3;

  // recognizer / evaluation
  std::string strategy = "ap";
  int recognizer_hidden = 256;  // M
  int recognizer_epochs = 300;
  double recognizer_lr = 1e-3;
  int recognizer_batch = 16;

  // synthetic generator
  int synth_identities = 5;
  int synth_recordings = 4;
  int synth_frames = 60;
  double synth_noise = 0.01;
  int center_root_joint = -1;

  std::vector<PretextTask> tasks() const {
    std::vector<PretextTask> out_tasks;
    std::stringstream ss(task);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      auto t = parse_task(item);
      if (!t) throw std::invalid_argument("unknown pretext task '" + item + "'");
      out_tasks.push_back(*t);
    }
    if (out_tasks.empty()) throw std::invalid_argument("no pretext task given");
    return out_tasks;
  }

  AttentionMode attention_mode() const {
    auto m = parse_attention(attention);
    if (!m) throw std::invalid_argument("unknown attention mode '" + attention + "'");
    return *m;
  }

  LossWeights loss_weights() const { return {lambda_s, lambda_a, lambda_c, beta}; }

  AdamConfig adam() const { return {lr, adam_beta1, adam_beta2, 1e-8, clip_norm}; }

  int effective_step() const { return step > 0 ? step : f / 2; }
};

// Cross-field rules; every violation names the rule it breaks.
inline std::vector<std::string> validate(const RunConfig& c) {
  std::vector<std::string> errors;
  auto fail = [&](const std::string& msg) { errors.push_back(msg); };

  AttentionMode mode;
  std::vector<PretextTask> tasks;
  try {
    mode = c.attention_mode();
  } catch (const std::exception& e) {
    fail(e.what());
    return errors;
  }
  try {
    tasks = c.tasks();
  } catch (const std::exception& e) {
    fail(e.what());
    return errors;
  }

  if (c.f < 2) fail("f must be >= 2");
  if (c.num_joints < 2) fail("J must be >= 2");
  if (c.hidden < 1) fail("K must be >= 1");
  if (c.window < 1) fail("D must be >= 1");
  if (c.epochs < 0) fail("epochs must be >= 0");
  if (c.lr <= 0) fail("lr must be positive");
  if (c.lambda_s < 0 || c.lambda_a < 0 || c.lambda_c < 0 || c.beta < 0) {
    fail("loss weights must be nonnegative");
  }
  if (c.effective_step() < 1) fail("step must be >= 1");
  if (c.threads < 1) fail("threads must be >= 1");

  for (PretextTask t : tasks) {
    const bool reverse = t == PretextTask::ReverseReconstruction;
    if (!reverse && (mode == AttentionMode::LAS || mode == AttentionMode::MBAS)) {
      fail(std::string("locality-aware attention requires the reverse-reconstruction task; '") +
           task_name(t) + "' allows only attention none or bas");
    }
    if (t == PretextTask::HalfPrediction && c.f % 2 != 0) {
      fail("half-prediction requires an even f");
    }
  }
  if (c.lambda_a > 0 && mode != AttentionMode::LAS) {
    fail("lambda_a > 0 requires attention mode las");
  }
  if (c.lambda_c > 0) {
    if (mode == AttentionMode::None) {
      fail("contrastive training (lambda_c > 0) requires an attention mode; "
           "context vectors are undefined without attention");
    }
    if (c.batch < 2) fail("contrastive training requires batch n >= 2");
    if (c.tau <= 0) fail("contrastive training requires tau > 0");
    if (c.interval < 1) fail("contrastive training requires interval >= 1");
  }
  if (c.strategy != "ap" && c.strategy != "sc") fail("strategy must be 'ap' or 'sc'");
  return errors;
}

inline void validate_or_throw(const RunConfig& c) {
  auto errors = validate(c);
  if (!errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw std::invalid_argument(msg);
  }
}

inline nlohmann::json config_to_json(const RunConfig& c) {
  return nlohmann::json{{"dataset", c.dataset},
                        {"out", c.out},
                        {"f", c.f},
                        {"num_joints", c.num_joints},
                        {"head_tail_discard", c.head_tail_discard},
                        {"step", c.effective_step()},
                        {"hidden", c.hidden},
                        {"window", c.window},
                        {"attention", c.attention},
                        {"task", c.task},
                        {"lambda_s", c.lambda_s},
                        {"lambda_a", c.lambda_a},
                        {"lambda_c", c.lambda_c},
                        {"beta", c.beta},
                        {"tau", c.tau},
                        {"batch", c.batch},
                        {"interval", c.interval},
                        {"proj_hidden", c.proj_hidden},
                        {"lr", c.lr},
                        {"adam_beta1", c.adam_beta1},
                        {"adam_beta2", c.adam_beta2},
                        {"clip_norm", c.clip_norm},
                        {"epochs", c.epochs},
                        {"seed", c.seed},
                        {"threads", c.threads},
                        {"strategy", c.strategy},
                        {"recognizer_hidden", c.recognizer_hidden},
                        {"recognizer_epochs", c.recognizer_epochs},
                        {"recognizer_lr", c.recognizer_lr},
                        {"recognizer_batch", c.recognizer_batch},
                        {"synth_identities", c.synth_identities},
                        {"synth_recordings", c.synth_recordings},
                        {"synth_frames", c.synth_frames},
                        {"synth_noise", c.synth_noise},
                        {"center_root_joint", c.center_root_joint}};
}

}  // namespace gaitenc
