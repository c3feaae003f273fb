#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gaitenc/skeleton.hpp"

namespace gaitenc {

// On-disk layout: a JSON manifest next to a JSON-Lines recordings file.
// Each recordings line: {"id": "<label>", "rec": <int>, "frames": [[[x,y,z] x J] x T]}.
// nlohmann serializes doubles as shortest round-trip decimals, which makes
// save -> load lossless.

inline nlohmann::json manifest_to_json(const DatasetManifest& m) {
  nlohmann::json j;
  j["num_joints"] = m.num_joints;
  j["sequence_length"] = m.sequence_length;
  j["recordings_file"] = m.recordings_file;
  j["center_root_joint"] = m.center_root_joint;
  j["identities"] = nlohmann::json::array();
  for (const auto& id : m.identities) {
    j["identities"].push_back({{"label", id.label}, {"recordings", id.recordings}});
  }
  j["splits"] = nlohmann::json::array();
  for (const auto& [key, tag] : m.splits) {
    nlohmann::json s;
    s["id"] = key.first;
    s["rec"] = key.second;
    s["phase"] = tag.phase == SplitPhase::Train ? "train" : "test";
    if (tag.role == SplitRole::Gallery) s["role"] = "gallery";
    if (tag.role == SplitRole::Probe) s["role"] = "probe";
    if (!tag.condition.empty()) s["condition"] = tag.condition;
    j["splits"].push_back(std::move(s));
  }
  return j;
}

inline DatasetManifest manifest_from_json(const nlohmann::json& j) {
  DatasetManifest m;
  m.num_joints = j.at("num_joints").get<int>();
  m.sequence_length = j.at("sequence_length").get<int>();
  m.recordings_file = j.at("recordings_file").get<std::string>();
  m.center_root_joint = j.value("center_root_joint", -1);
  for (const auto& id : j.at("identities")) {
    m.identities.push_back({id.at("label").get<int>(), id.at("recordings").get<int>()});
  }
  for (int i = 0; i < static_cast<int>(m.identities.size()); ++i) {
    if (m.identities[i].label != i + 1) {
      throw std::runtime_error("manifest: identity labels must be contiguous 1..C");
    }
  }
  if (j.contains("splits")) {
    for (const auto& s : j.at("splits")) {
      SplitTag tag;
      tag.phase = s.at("phase").get<std::string>() == "train" ? SplitPhase::Train : SplitPhase::Test;
      const std::string role = s.value("role", "");
      if (role == "gallery") tag.role = SplitRole::Gallery;
      if (role == "probe") tag.role = SplitRole::Probe;
      tag.condition = s.value("condition", "");
      m.splits[{s.at("id").get<int>(), s.at("rec").get<int>()}] = tag;
    }
  }
  return m;
}

inline void save_dataset(const Dataset& ds, const std::filesystem::path& manifest_path) {
  DatasetManifest manifest = ds.manifest;
  if (manifest.recordings_file.empty()) {
    manifest.recordings_file = manifest_path.stem().string() + ".jsonl";
  }
  std::filesystem::create_directories(manifest_path.parent_path().empty()
                                          ? "."
                                          : manifest_path.parent_path());
  const auto rec_path = manifest_path.parent_path() / manifest.recordings_file;
  {
    std::ofstream out(rec_path);
    if (!out) throw std::runtime_error("cannot write " + rec_path.string());
    for (const Recording& r : ds.recordings) {
      nlohmann::json line;
      line["id"] = std::to_string(r.identity);
      line["rec"] = r.rec;
      auto& frames = line["frames"] = nlohmann::json::array();
      for (const SkeletonFrame& frame : r.frames) {
        nlohmann::json jf = nlohmann::json::array();
        for (const auto& joint : frame.joints) {
          jf.push_back({joint[0], joint[1], joint[2]});
        }
        frames.push_back(std::move(jf));
      }
      out << line.dump() << '\n';
    }
  }
  std::ofstream out(manifest_path);
  if (!out) throw std::runtime_error("cannot write " + manifest_path.string());
  out << manifest_to_json(manifest).dump(2) << '\n';
}

inline Dataset load_dataset(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open manifest " + manifest_path.string());
  nlohmann::json mj;
  try {
    in >> mj;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed manifest " + manifest_path.string() + ": " + e.what());
  }

  Dataset ds;
  ds.manifest = manifest_from_json(mj);

  const auto rec_path = manifest_path.parent_path() / ds.manifest.recordings_file;
  std::ifstream rec_in(rec_path);
  if (!rec_in) {
    throw std::runtime_error("manifest references missing recordings file " + rec_path.string());
  }
  std::string line;
  int line_no = 0;
  while (std::getline(rec_in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json lj;
    try {
      lj = nlohmann::json::parse(line);
      Recording r;
      r.identity = std::stoi(lj.at("id").get<std::string>());
      r.rec = lj.at("rec").get<int>();
      for (const auto& jf : lj.at("frames")) {
        SkeletonFrame frame;
        for (const auto& joint : jf) {
          if (joint.size() != 3) throw std::runtime_error("joint is not a 3-vector");
          frame.joints.push_back({joint[0].get<double>(), joint[1].get<double>(),
                                  joint[2].get<double>()});
        }
        if (frame.num_joints() != ds.manifest.num_joints) {
          throw std::runtime_error("frame has " + std::to_string(frame.num_joints()) +
                                   " joints, manifest says " +
                                   std::to_string(ds.manifest.num_joints));
        }
        if (!frame.all_finite()) throw std::runtime_error("non-finite coordinate");
        r.frames.push_back(std::move(frame));
      }
      ds.recordings.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw std::runtime_error(rec_path.string() + ":" + std::to_string(line_no) +
                               ": malformed recording line: " + e.what());
    }
  }

  if (ds.manifest.center_root_joint >= 0) {
    const int root = ds.manifest.center_root_joint;
    if (root >= ds.manifest.num_joints) {
      throw std::runtime_error("center_root_joint out of range");
    }
    for (Recording& r : ds.recordings) {
      for (SkeletonFrame& frame : r.frames) {
        const auto origin = frame.joints[root];
        for (auto& joint : frame.joints) {
          for (int d = 0; d < 3; ++d) joint[d] -= origin[d];
        }
      }
    }
  }
  return ds;
}

}  // namespace gaitenc
