#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gaitenc/evaluation.hpp"
#include "gaitenc/features.hpp"
#include "gaitenc/train.hpp"

namespace gaitenc {

// shortest round-trip decimal, the same convention the dataset files use
inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

// one CSV per dimension: epoch, L_S, L_A, L_C, total
inline void write_loss_curves(const std::filesystem::path& dir, const TrainResult& result) {
  std::filesystem::create_directories(dir);
  for (int di = 0; di < 3; ++di) {
    const auto path = dir / (std::string("loss_") + dim_name(static_cast<Dim3>(di)) + ".csv");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "epoch,L_S,L_A,L_C,total\n";
    const auto& curve = result.curves[di];
    for (std::size_t e = 0; e < curve.size(); ++e) {
      out << e << ',' << format_double(curve[e].ls) << ',' << format_double(curve[e].la) << ','
          << format_double(curve[e].lc) << ',' << format_double(curve[e].total) << '\n';
    }
  }
}

inline void write_attention_csv(const std::filesystem::path& path, const Tensor& mean_attention) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (int r = 0; r < mean_attention.rows(); ++r) {
    for (int c = 0; c < mean_attention.cols(); ++c) {
      if (c) out << ',';
      out << format_double(mean_attention.at(r, c));
    }
    out << '\n';
  }
}

inline nlohmann::json metrics_to_json(const EvalResult& r) {
  return nlohmann::json{{"rank1", r.rank1}, {"nauc", r.nauc}, {"cmc", r.curve.values}};
}

inline void write_metrics(const std::filesystem::path& dir, const EvalResult& r) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "metrics.json");
    if (!out) throw std::runtime_error("cannot write metrics.json");
    out << metrics_to_json(r).dump(2) << '\n';
  }
  std::ofstream out(dir / "metrics.csv");
  if (!out) throw std::runtime_error("cannot write metrics.csv");
  out << "metric,value\n";
  out << "rank1," << format_double(r.rank1) << '\n';
  out << "nauc," << format_double(r.nauc) << '\n';
  for (std::size_t k = 0; k < r.curve.values.size(); ++k) {
    out << "cmc_" << (k + 1) << ',' << format_double(r.curve.values[k]) << '\n';
  }
}

// JSONL, one encoding per line:
// {"id", "rec", "seq_index", "level", "variant", "vector": [...]}
inline void save_encodings(const std::filesystem::path& path,
                           std::span<const GaitEncoding> encodings) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const GaitEncoding& e : encodings) {
    nlohmann::json line;
    line["id"] = std::to_string(e.identity);
    line["rec"] = e.recording;
    line["seq_index"] = e.seq_index;
    line["level"] = e.level == EncodingLevel::Sequence ? "sequence" : "skeleton";
    line["variant"] = variant_name(e.variant);
    line["vector"] = e.vec;
    out << line.dump() << '\n';
  }
}

// `frames` is the sequence length the encodings were extracted with (the
// manifest's sequence_length); sequence-level vectors are f equal slices.
inline std::vector<GaitEncoding> load_encodings(const std::filesystem::path& path, int frames) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open encodings " + path.string());
  if (frames < 1) throw std::invalid_argument("load_encodings: frames must be >= 1");
  std::vector<GaitEncoding> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      GaitEncoding e;
      e.identity = std::stoi(j.at("id").get<std::string>());
      e.recording = j.at("rec").get<int>();
      e.seq_index = j.at("seq_index").get<int>();
      e.level = j.at("level").get<std::string>() == "sequence" ? EncodingLevel::Sequence
                                                               : EncodingLevel::Skeleton;
      e.variant = j.at("variant").get<std::string>() == "CAGE" ? EncodingVariant::CAGE
                                                               : EncodingVariant::AGE;
      e.vec = j.at("vector").get<std::vector<double>>();
      e.frames = e.level == EncodingLevel::Sequence ? frames : 1;
      if (e.vec.size() % e.frames != 0) {
        throw std::runtime_error("vector length not divisible by sequence length");
      }
      out.push_back(std::move(e));
    } catch (const std::exception& ex) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": malformed encoding line: " + ex.what());
    }
  }
  return out;
}

}  // namespace gaitenc
