// Command-line driver: synth | train | extract | evaluate | attn-dump | sweep
//
// Every subcommand writes a machine-readable echo of its resolved
// configuration (config.json) into the output directory. A config file in
// key=value format can be supplied with --config; command-line flags win.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gaitenc/checkpoint.hpp"
#include "gaitenc/config.hpp"
#include "gaitenc/contrastive.hpp"
#include "gaitenc/dataset_io.hpp"
#include "gaitenc/evaluation.hpp"
#include "gaitenc/features.hpp"
#include "gaitenc/model.hpp"
#include "gaitenc/reports.hpp"
#include "gaitenc/skeleton.hpp"
#include "gaitenc/synthetic.hpp"
#include "gaitenc/train.hpp"

namespace fs = std::filesystem;
using namespace gaitenc;

namespace {

void write_config_echo(const fs::path& dir, const RunConfig& cfg) {
  fs::create_directories(dir);
  std::ofstream out(dir / "config.json");
  if (!out) throw std::runtime_error("cannot write config echo in " + dir.string());
  out << config_to_json(cfg).dump(2) << '\n';
}

// key = value lines, one per option, named like the command-line flags.
// Applied before flag parsing, so flags always win.
void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    for (char& c : key) {
      if (c == '_') c = '-';
    }
    try {
      if (key == "dataset") cfg.dataset = value;
      else if (key == "out") cfg.out = value;
      else if (key == "f") cfg.f = std::stoi(value);
      else if (key == "joints") cfg.num_joints = std::stoi(value);
      else if (key == "discard") cfg.head_tail_discard = std::stoi(value);
      else if (key == "step") cfg.step = std::stoi(value);
      else if (key == "hidden") cfg.hidden = std::stoi(value);
      else if (key == "window") cfg.window = std::stoi(value);
      else if (key == "attention") cfg.attention = value;
      else if (key == "task") cfg.task = value;
      else if (key == "lambda-s") cfg.lambda_s = std::stod(value);
      else if (key == "lambda-a") cfg.lambda_a = std::stod(value);
      else if (key == "lambda-c") cfg.lambda_c = std::stod(value);
      else if (key == "beta") cfg.beta = std::stod(value);
      else if (key == "tau") cfg.tau = std::stod(value);
      else if (key == "batch") cfg.batch = std::stoi(value);
      else if (key == "interval") cfg.interval = std::stoi(value);
      else if (key == "proj-hidden") cfg.proj_hidden = std::stoi(value);
      else if (key == "lr") cfg.lr = std::stod(value);
      else if (key == "clip-norm") cfg.clip_norm = std::stod(value);
      else if (key == "epochs") cfg.epochs = std::stoi(value);
      else if (key == "seed") cfg.seed = std::stoull(value);
      else if (key == "threads") cfg.threads = std::stoi(value);
      else if (key == "strategy") cfg.strategy = value;
      else if (key == "recognizer-hidden") cfg.recognizer_hidden = std::stoi(value);
      else if (key == "recognizer-epochs") cfg.recognizer_epochs = std::stoi(value);
      else if (key == "recognizer-lr") cfg.recognizer_lr = std::stod(value);
      else if (key == "recognizer-batch") cfg.recognizer_batch = std::stoi(value);
      else if (key == "identities") cfg.synth_identities = std::stoi(value);
      else if (key == "recordings") cfg.synth_recordings = std::stoi(value);
      else if (key == "frames") cfg.synth_frames = std::stoi(value);
      else if (key == "noise") cfg.synth_noise = std::stod(value);
      else if (key == "center-root-joint") cfg.center_root_joint = std::stoi(value);
      else {
        throw std::runtime_error("unknown key '" + key + "'");
      }
    } catch (const std::runtime_error&) {
      throw;
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad value for '" +
                               key + "'");
    }
  }
}

// The dataset defines J outright and the default f; an explicit --f re-cuts
// windows at a different length, while an explicit conflicting --joints is a
// configuration error.
void adopt_manifest(RunConfig& cfg, const Dataset& ds, bool f_explicit, bool joints_explicit) {
  if (ds.manifest.sequence_length > 0 && !f_explicit) cfg.f = ds.manifest.sequence_length;
  if (ds.manifest.num_joints > 0) {
    if (joints_explicit && cfg.num_joints != ds.manifest.num_joints) {
      throw std::invalid_argument("--joints " + std::to_string(cfg.num_joints) +
                                  " conflicts with the dataset's J=" +
                                  std::to_string(ds.manifest.num_joints));
    }
    cfg.num_joints = ds.manifest.num_joints;
  }
}

struct ExplicitFlags {
  bool f = false;
  bool joints = false;
};

std::vector<SkeletonSequence> split_windows(const Dataset& ds, const RunConfig& cfg,
                                            const std::string& which) {
  std::vector<SkeletonSequence> out;
  for (const Recording& r : ds.recordings) {
    const SplitTag tag = ds.manifest.split_for(r.identity, r.rec);
    const bool is_train = tag.phase == SplitPhase::Train;
    if (which == "train" && !is_train) continue;
    if (which == "test" && is_train) continue;
    auto windows = split_recording(r, cfg.f, cfg.head_tail_discard, cfg.effective_step());
    out.insert(out.end(), windows.begin(), windows.end());
  }
  return out;
}

// per-task view of the configuration; prediction/sorting fall back to basic
// attention, matching how the combined pretext configurations are run
RunConfig task_config(const RunConfig& cfg, PretextTask task) {
  RunConfig tc = cfg;
  tc.task = task_name(task);
  if (task != PretextTask::ReverseReconstruction &&
      (tc.attention_mode() == AttentionMode::LAS || tc.attention_mode() == AttentionMode::MBAS)) {
    tc.attention = "bas";
    tc.lambda_a = 0.0;
  }
  validate_or_throw(tc);
  return tc;
}

struct TrainedArtifacts {
  fs::path checkpoint;
};

TrainedArtifacts run_training(const RunConfig& tc, const Dataset& ds, const fs::path& dir) {
  fs::create_directories(dir);
  GaitModel model = GaitModel::from_config(tc);
  model.init(tc.seed);
  TrainResult result = train(model, ds, tc);
  for (const std::string& w : result.warnings) std::cerr << "warning: " << w << '\n';
  write_loss_curves(dir, result);
  const fs::path ck = dir / "checkpoint.json";
  save_checkpoint(ck, model.all_parameters(), config_to_json(tc));
  write_config_echo(dir, tc);
  return {ck};
}

RunConfig config_from_checkpoint(const LoadedCheckpoint& ck) {
  RunConfig cfg;
  const nlohmann::json& j = ck.config;
  cfg.f = j.value("f", cfg.f);
  cfg.num_joints = j.value("num_joints", cfg.num_joints);
  cfg.hidden = j.value("hidden", cfg.hidden);
  cfg.window = j.value("window", cfg.window);
  cfg.attention = j.value("attention", cfg.attention);
  cfg.task = j.value("task", cfg.task);
  cfg.lambda_a = j.value("lambda_a", cfg.lambda_a);
  cfg.lambda_c = j.value("lambda_c", cfg.lambda_c);
  cfg.proj_hidden = j.value("proj_hidden", cfg.proj_hidden);
  cfg.tau = j.value("tau", cfg.tau);
  return cfg;
}

std::vector<GaitEncoding> extract_with_checkpoint(const fs::path& ck_path, const Dataset& ds,
                                                  const RunConfig& cli_cfg,
                                                  const std::string& split) {
  LoadedCheckpoint ck = load_checkpoint(ck_path);
  RunConfig mc = config_from_checkpoint(ck);
  if (mc.num_joints != ds.manifest.num_joints) {
    throw std::runtime_error("checkpoint was trained with J=" + std::to_string(mc.num_joints) +
                             " but the dataset has J=" + std::to_string(ds.manifest.num_joints));
  }
  GaitModel model(mc.f, mc.num_joints, mc.hidden, mc.window, mc.attention_mode(),
                  mc.lambda_c > 0, mc.proj_hidden);
  restore_parameters(ck, model.all_parameters());

  RunConfig wc = cli_cfg;
  wc.f = mc.f;
  wc.num_joints = mc.num_joints;
  auto windows = split_windows(ds, wc, split);
  const EncodingVariant variant =
      mc.lambda_c > 0 ? EncodingVariant::CAGE : EncodingVariant::AGE;
  const PretextTask task = mc.tasks().front();
  return extract_encodings(model, windows, variant, task);
}

int cmd_synth(const RunConfig& cfg) {
  validate_or_throw(cfg);
  SyntheticSpec spec;
  spec.identities = cfg.synth_identities;
  spec.recordings_per_identity = cfg.synth_recordings;
  spec.frames_per_recording = cfg.synth_frames;
  spec.num_joints = cfg.num_joints;
  spec.noise = cfg.synth_noise;
  spec.seed = cfg.seed;
  Dataset ds = generate_synthetic(spec);
  ds.manifest.sequence_length = cfg.f;
  ds.manifest.center_root_joint = cfg.center_root_joint;
  assign_default_splits(ds, 1, 1);
  const fs::path dir(cfg.out);
  fs::create_directories(dir);
  save_dataset(ds, dir / "dataset.json");
  write_config_echo(dir, cfg);
  std::cout << "wrote " << (dir / "dataset.json").string() << " (" << ds.recordings.size()
            << " recordings)\n";
  return 0;
}

int cmd_train(RunConfig cfg, const ExplicitFlags& given) {
  Dataset ds = load_dataset(cfg.dataset);
  adopt_manifest(cfg, ds, given.f, given.joints);
  const auto tasks = cfg.tasks();
  const fs::path out(cfg.out);
  if (tasks.size() == 1) {
    run_training(task_config(cfg, tasks[0]), ds, out);
  } else {
    write_config_echo(out, cfg);
    for (PretextTask t : tasks) {
      run_training(task_config(cfg, t), ds, out / task_name(t));
    }
  }
  std::cout << "training artifacts in " << out.string() << '\n';
  return 0;
}

int cmd_extract(RunConfig cfg, const std::vector<std::string>& checkpoints,
                const std::string& split) {
  Dataset ds = load_dataset(cfg.dataset);
  adopt_manifest(cfg, ds, false, false);
  std::vector<std::vector<GaitEncoding>> per_task;
  for (const std::string& ck : checkpoints) {
    per_task.push_back(extract_with_checkpoint(ck, ds, cfg, split));
  }
  std::vector<GaitEncoding> fused = fuse_encodings(std::move(per_task));
  const fs::path dir(cfg.out);
  fs::create_directories(dir);
  save_encodings(dir / "encodings.jsonl", fused);
  write_config_echo(dir, cfg);
  std::cout << "wrote " << (dir / "encodings.jsonl").string() << " (" << fused.size()
            << " sequences)\n";
  return 0;
}

int cmd_evaluate(RunConfig cfg, const std::string& encodings_path, const std::string& protocol) {
  Dataset ds = load_dataset(cfg.dataset);
  adopt_manifest(cfg, ds, false, false);
  validate_or_throw(cfg);
  auto encodings = load_encodings(encodings_path, cfg.f);

  std::vector<GaitEncoding> train_set, gallery, probes;
  for (const GaitEncoding& e : encodings) {
    const SplitTag tag = ds.manifest.split_for(e.identity, e.recording);
    if (tag.phase == SplitPhase::Train) {
      train_set.push_back(e);
    } else if (tag.role == SplitRole::Gallery) {
      gallery.push_back(e);
    } else if (tag.role == SplitRole::Probe) {
      probes.push_back(e);
    }
  }
  const int classes = ds.num_identities();
  const fs::path dir(cfg.out);

  EvalResult result;
  if (protocol == "classifier") {
    const ReidStrategy strategy = cfg.strategy == "ap" ? ReidStrategy::AP : ReidStrategy::SC;
    RecognizerConfig rc{cfg.recognizer_hidden, cfg.recognizer_epochs, cfg.recognizer_lr, cfg.seed,
                        cfg.recognizer_batch};
    RecognitionNet net = train_recognizer(train_set, classes, strategy, rc);
    fs::create_directories(dir);
    save_checkpoint(dir / "recognizer.json", net.parameters(), config_to_json(cfg));
    std::vector<GaitEncoding> test_set = gallery;
    test_set.insert(test_set.end(), probes.begin(), probes.end());
    result = evaluate_classifier(net, test_set, strategy);
  } else if (protocol == "match") {
    MatchResult m = match_gallery(probes, gallery);
    result.rank1 = m.rank1;
    result.curve = m.curve;
    result.nauc = nauc(m.curve) * 100.0;
  } else {
    throw std::invalid_argument("unknown protocol '" + protocol + "' (classifier|match)");
  }
  write_metrics(dir, result);
  write_config_echo(dir, cfg);
  std::cout << "rank1 " << result.rank1 << " nauc " << result.nauc << '\n';
  return 0;
}

int cmd_attn_dump(RunConfig cfg, const std::string& checkpoint, const std::string& split) {
  Dataset ds = load_dataset(cfg.dataset);
  adopt_manifest(cfg, ds, false, false);
  LoadedCheckpoint ck = load_checkpoint(checkpoint);
  RunConfig mc = config_from_checkpoint(ck);
  if (mc.attention_mode() == AttentionMode::None) {
    throw std::invalid_argument("attn-dump: checkpoint was trained without attention");
  }
  GaitModel model(mc.f, mc.num_joints, mc.hidden, mc.window, mc.attention_mode(),
                  mc.lambda_c > 0, mc.proj_hidden);
  restore_parameters(ck, model.all_parameters());

  RunConfig wc = cfg;
  wc.f = mc.f;
  wc.num_joints = mc.num_joints;
  auto windows = split_windows(ds, wc, split);
  if (windows.empty()) throw std::runtime_error("attn-dump: no sequences in split '" + split + "'");

  const fs::path dir(cfg.out);
  fs::create_directories(dir);
  nlohmann::json summary;
  for (Dim3 d : {Dim3::X, Dim3::Y, Dim3::Z}) {
    GaitModelDim& dm = model.dim(d);
    Tensor mean({mc.f, mc.f});
    for (const SkeletonSequence& seq : windows) {
      PretextResult pr = build_pretext(PretextTask::ReverseReconstruction, seq, {}, nullptr);
      Tape tape;
      GraphBinding bind(tape);
      EncodeResult er = dm.encode(tape, bind, DimensionSlice::from_sequence(seq, d));
      DecodeTrace trace = dm.decode_sequence(tape, bind, er, *pr.sample, Phase::Test);
      Tensor m = dm.attention_matrix(tape, trace);
      for (int i = 0; i < m.size(); ++i) mean[i] += m[i];
    }
    for (int i = 0; i < mean.size(); ++i) mean[i] /= static_cast<double>(windows.size());
    for (int r = 0; r < mean.rows(); ++r) {
      double row_sum = 0.0;
      for (int c = 0; c < mean.cols(); ++c) row_sum += mean.at(r, c);
      if (std::abs(row_sum - 1.0) > 1e-6) {
        throw std::runtime_error("attn-dump: averaged row " + std::to_string(r) +
                                 " sums to " + std::to_string(row_sum));
      }
    }
    const std::string name = std::string("attn_") + dim_name(d) + ".csv";
    write_attention_csv(dir / name, mean);
    const double mass = window_attention_mass(mean, mc.window);
    summary[std::string(1, dim_name(d))] = {{"window_mass", mass}};
    std::cout << "dim " << dim_name(d) << " in-window attention mass " << mass << '\n';
  }
  std::ofstream sum(dir / "attn_summary.json");
  sum << summary.dump(2) << '\n';
  write_config_echo(dir, cfg);
  return 0;
}

int cmd_sweep(RunConfig cfg, const std::string& axis, const std::vector<double>& values,
              const ExplicitFlags& given) {
  if (values.size() < 2) {
    throw std::invalid_argument("sweep needs at least 2 values for axis " + axis);
  }
  if (axis != "tau" && axis != "interval") {
    throw std::invalid_argument("sweep axis must be tau or interval");
  }
  Dataset ds = load_dataset(cfg.dataset);
  adopt_manifest(cfg, ds, given.f, given.joints);

  const fs::path dir(cfg.out);
  fs::create_directories(dir);
  std::ofstream csv(dir / "sweep.csv");
  csv << axis << ",rank1,nauc,status\n";

  int failed = 0;
  for (double value : values) {
    RunConfig rc = cfg;
    if (axis == "tau") {
      rc.tau = value;
    } else {
      rc.interval = static_cast<int>(value);
    }
    const std::string tag = axis + "_" + format_double(value);
    try {
      const RunConfig tc = task_config(rc, rc.tasks().front());
      GaitModel model = GaitModel::from_config(tc);
      model.init(tc.seed);
      train(model, ds, tc);

      RunConfig wc = tc;
      auto train_windows = split_windows(ds, wc, "train");
      auto test_windows = split_windows(ds, wc, "test");
      const EncodingVariant variant =
          tc.lambda_c > 0 ? EncodingVariant::CAGE : EncodingVariant::AGE;
      auto train_enc = extract_encodings(model, train_windows, variant, tc.tasks().front());
      auto test_enc = extract_encodings(model, test_windows, variant, tc.tasks().front());

      const ReidStrategy strategy = tc.strategy == "ap" ? ReidStrategy::AP : ReidStrategy::SC;
      RecognizerConfig rcfg{tc.recognizer_hidden, tc.recognizer_epochs, tc.recognizer_lr, tc.seed,
                            tc.recognizer_batch};
      RecognitionNet net = train_recognizer(train_enc, ds.num_identities(), strategy, rcfg);
      EvalResult r = evaluate_classifier(net, test_enc, strategy);
      csv << format_double(value) << ',' << format_double(r.rank1) << ','
          << format_double(r.nauc) << ",ok\n";
      std::cout << tag << ": rank1 " << r.rank1 << " nauc " << r.nauc << '\n';
    } catch (const std::exception& e) {
      csv << format_double(value) << ",,," << "error: " << e.what() << '\n';
      std::cerr << tag << " failed: " << e.what() << '\n';
      ++failed;
    }
  }
  write_config_echo(dir, cfg);
  std::cout << "wrote " << (dir / "sweep.csv").string() << '\n';
  return failed == 0 ? 0 : 1;
}

void add_common_options(CLI::App* sub, RunConfig& cfg, std::string& config_path) {
  sub->add_option("--config", config_path, "key=value configuration file; flags win");
  sub->add_option("--dataset", cfg.dataset, "dataset manifest path");
  sub->add_option("--out", cfg.out, "output directory");
  sub->add_option("--f", cfg.f, "sequence length");
  sub->add_option("--joints", cfg.num_joints, "joints per skeleton");
  sub->add_option("--discard", cfg.head_tail_discard, "frames discarded from each end");
  sub->add_option("--step", cfg.step, "window step (0 = f/2)");
  sub->add_option("--hidden", cfg.hidden, "LSTM hidden size K");
  sub->add_option("--window", cfg.window, "attention window D");
  sub->add_option("--attention", cfg.attention, "none|bas|mbas|las");
  sub->add_option("--task", cfg.task, "pretext task(s), comma separated");
  sub->add_option("--lambda-s", cfg.lambda_s, "reconstruction loss weight");
  sub->add_option("--lambda-a", cfg.lambda_a, "alignment loss weight");
  sub->add_option("--lambda-c", cfg.lambda_c, "contrastive loss weight");
  sub->add_option("--beta", cfg.beta, "L2 regularization weight");
  sub->add_option("--tau", cfg.tau, "contrastive temperature");
  sub->add_option("--batch", cfg.batch, "contrastive batch size n");
  sub->add_option("--interval", cfg.interval, "contrasting interval");
  sub->add_option("--proj-hidden", cfg.proj_hidden, "projection hidden width (0 = fK/2)");
  sub->add_option("--lr", cfg.lr, "learning rate");
  sub->add_option("--clip-norm", cfg.clip_norm, "gradient norm clip (<=0 disables)");
  sub->add_option("--epochs", cfg.epochs, "training epochs");
  sub->add_option("--seed", cfg.seed, "random seed");
  sub->add_option("--threads", cfg.threads, "dimension training threads (1 or 3)");
  sub->add_option("--strategy", cfg.strategy, "re-id strategy ap|sc");
  sub->add_option("--recognizer-hidden", cfg.recognizer_hidden, "recognizer hidden width M");
  sub->add_option("--recognizer-epochs", cfg.recognizer_epochs, "recognizer epochs");
  sub->add_option("--recognizer-lr", cfg.recognizer_lr, "recognizer learning rate");
  sub->add_option("--recognizer-batch", cfg.recognizer_batch, "recognizer minibatch size");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"self-supervised gait encoding for skeleton-based person re-identification"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;

  // config-file values load first; flags parsed afterwards override them
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    try {
      if (arg == "--config" && i + 1 < argc) {
        apply_config_file(cfg, argv[i + 1]);
      } else if (arg.rfind("--config=", 0) == 0) {
        apply_config_file(cfg, arg.substr(9));
      }
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
  }

  auto* synth = app.add_subcommand("synth", "generate a synthetic gait dataset");
  add_common_options(synth, cfg, config_path);
  synth->add_option("--identities", cfg.synth_identities, "number of identities");
  synth->add_option("--recordings", cfg.synth_recordings, "recordings per identity");
  synth->add_option("--frames", cfg.synth_frames, "frames per recording");
  synth->add_option("--noise", cfg.synth_noise, "coordinate noise stddev");
  synth->add_option("--center-root-joint", cfg.center_root_joint,
                    "center frames at this joint on load (-1 = off)");

  auto* train_cmd = app.add_subcommand("train", "self-supervised gait model training");
  add_common_options(train_cmd, cfg, config_path);

  std::vector<std::string> checkpoints;
  std::string split = "test";
  auto* extract = app.add_subcommand("extract", "extract gait encodings with a checkpoint");
  add_common_options(extract, cfg, config_path);
  extract->add_option("--checkpoint", checkpoints, "checkpoint path(s); several fuse per-task features")
      ->required();
  extract->add_option("--split", split, "train|test|all");

  std::string encodings_path, protocol = "classifier";
  auto* evaluate = app.add_subcommand("evaluate", "re-id metrics from saved encodings");
  add_common_options(evaluate, cfg, config_path);
  evaluate->add_option("--encodings", encodings_path, "encodings JSONL path")->required();
  evaluate->add_option("--protocol", protocol, "classifier|match");

  std::string attn_checkpoint;
  auto* attn = app.add_subcommand("attn-dump", "mean attention matrices per dimension");
  add_common_options(attn, cfg, config_path);
  attn->add_option("--checkpoint", attn_checkpoint, "checkpoint path")->required();
  attn->add_option("--split", split, "train|test|all");

  std::string axis = "tau";
  std::vector<double> values;
  auto* sweep = app.add_subcommand("sweep", "train+evaluate across tau or interval values");
  add_common_options(sweep, cfg, config_path);
  sweep->add_option("--axis", axis, "tau|interval");
  sweep->add_option("--values", values, "axis values, comma separated (>= 2)")
      ->required()
      ->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    auto flags_of = [](CLI::App* sub) {
      ExplicitFlags g;
      g.f = sub->count("--f") > 0;
      g.joints = sub->count("--joints") > 0;
      return g;
    };
    if (synth->parsed()) return cmd_synth(cfg);
    if (train_cmd->parsed()) return cmd_train(cfg, flags_of(train_cmd));
    if (extract->parsed()) return cmd_extract(cfg, checkpoints, split);
    if (evaluate->parsed()) return cmd_evaluate(cfg, encodings_path, protocol);
    if (attn->parsed()) return cmd_attn_dump(cfg, attn_checkpoint, split);
    if (sweep->parsed()) return cmd_sweep(cfg, axis, values, flags_of(sweep));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
