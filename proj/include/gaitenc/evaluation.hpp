#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gaitenc/features.hpp"

namespace gaitenc {

// Cumulative matching characteristic over G gallery identities:
// values[k-1] = fraction of probes whose true identity appears at rank <= k.
struct CmcCurve {
  std::vector<double> values;

  int ranks() const { return static_cast<int>(values.size()); }
  double rank1_percent() const { return values.empty() ? 0.0 : values.front() * 100.0; }
};

// rankings[i] is probe i's full ranking over the gallery identities, best
// first; truth[i] its true identity. Ties must already be broken (rankings
// are ordered lists).
inline CmcCurve cmc(const std::vector<std::vector<int>>& rankings, const std::vector<int>& truth) {
  if (rankings.size() != truth.size()) {
    throw std::invalid_argument("cmc: rankings/truth size mismatch");
  }
  if (rankings.empty()) throw std::invalid_argument("cmc: no probes");
  const std::size_t g = rankings.front().size();
  std::vector<int> hits(g, 0);
  for (std::size_t i = 0; i < rankings.size(); ++i) {
    if (rankings[i].size() != g) {
      throw std::invalid_argument("cmc: probe " + std::to_string(i) +
                                  " has a ranking over a different gallery size");
    }
    auto it = std::find(rankings[i].begin(), rankings[i].end(), truth[i]);
    if (it == rankings[i].end()) {
      throw std::invalid_argument("cmc: probe " + std::to_string(i) + " identity " +
                                  std::to_string(truth[i]) + " absent from gallery");
    }
    hits[static_cast<std::size_t>(it - rankings[i].begin())] += 1;
  }
  CmcCurve curve;
  curve.values.resize(g);
  double cum = 0.0;
  for (std::size_t k = 0; k < g; ++k) {
    cum += hits[k];
    curve.values[k] = cum / static_cast<double>(rankings.size());
  }
  return curve;
}

// Area under the CMC normalized by the number of ranks, in (0, 1].
inline double nauc(const CmcCurve& curve) {
  if (curve.values.empty()) throw std::invalid_argument("nauc: empty curve");
  double s = 0.0;
  for (double v : curve.values) s += v;
  return s / static_cast<double>(curve.values.size());
}

struct EvalResult {
  double rank1 = 0.0;  // percent
  double nauc = 0.0;   // x100
  CmcCurve curve;
};

// Classifier-based multi-shot evaluation: each probe sequence is ranked over
// the C classes by predicted probability (ties broken by ascending label).
inline EvalResult evaluate_classifier(const RecognitionNet& net,
                                      std::span<const GaitEncoding> probes,
                                      ReidStrategy strategy) {
  if (probes.empty()) throw std::invalid_argument("evaluate_classifier: no probes");
  std::vector<std::vector<int>> rankings;
  std::vector<int> truth;
  rankings.reserve(probes.size());
  for (const GaitEncoding& e : probes) {
    if (e.identity < 1 || e.identity > net.classes()) {
      throw std::invalid_argument("evaluate_classifier: label " + std::to_string(e.identity) +
                                  " outside the class range 1.." + std::to_string(net.classes()));
    }
    const std::vector<double> dist = predict_sequence(net, e, strategy);
    std::vector<int> order(dist.size());
    for (std::size_t c = 0; c < order.size(); ++c) order[c] = static_cast<int>(c) + 1;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (dist[a - 1] != dist[b - 1]) return dist[a - 1] > dist[b - 1];
      return a < b;
    });
    rankings.push_back(std::move(order));
    truth.push_back(e.identity);
  }
  EvalResult r;
  r.curve = cmc(rankings, truth);
  r.rank1 = r.curve.rank1_percent();
  r.nauc = nauc(r.curve) * 100.0;
  return r;
}

struct MatchResult {
  double rank1 = 0.0;  // percent
  CmcCurve curve;
};

// Gallery-probe matching over sequence-level encodings with Euclidean
// distance. An identity's gallery score is the minimum distance over its
// gallery sequences; ranking ties break by ascending label.
inline MatchResult match_gallery(std::span<const GaitEncoding> probes,
                                 std::span<const GaitEncoding> gallery) {
  if (probes.empty() || gallery.empty()) {
    throw std::invalid_argument("match_gallery: empty probe or gallery set");
  }
  const std::size_t width = gallery.front().vec.size();
  for (const auto& g : gallery) {
    if (g.vec.size() != width) throw std::invalid_argument("match_gallery: gallery width mismatch");
  }
  std::set<int> ids;
  for (const auto& g : gallery) ids.insert(g.identity);

  std::vector<std::vector<int>> rankings;
  std::vector<int> truth;
  for (const GaitEncoding& p : probes) {
    if (p.vec.size() != width) {
      throw std::invalid_argument("match_gallery: probe width " + std::to_string(p.vec.size()) +
                                  " != gallery width " + std::to_string(width));
    }
    std::map<int, double> best;  // identity -> min distance
    for (const GaitEncoding& g : gallery) {
      double d2 = 0.0;
      for (std::size_t i = 0; i < width; ++i) {
        const double d = p.vec[i] - g.vec[i];
        d2 += d * d;
      }
      auto [it, fresh] = best.try_emplace(g.identity, d2);
      if (!fresh) it->second = std::min(it->second, d2);
    }
    std::vector<int> order(ids.begin(), ids.end());
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (best[a] != best[b]) return best[a] < best[b];
      return a < b;
    });
    rankings.push_back(std::move(order));
    truth.push_back(p.identity);
  }
  MatchResult r;
  r.curve = cmc(rankings, truth);
  r.rank1 = r.curve.rank1_percent();
  return r;
}

// Mean in-window attention mass of an f x f attention matrix:
// mean over rows t of sum_{|j - p_t| <= D} a_t(j) with p_t = f - t + 1.
inline double window_attention_mass(const Tensor& attn, int d_window) {
  const int f = attn.rows();
  double total = 0.0;
  for (int t = 1; t <= f; ++t) {
    const int p = f - t + 1;
    double mass = 0.0;
    for (int j = 1; j <= f; ++j) {
      if (std::abs(j - p) <= d_window) mass += attn.at(t - 1, j - 1);
    }
    total += mass;
  }
  return total / f;
}

}  // namespace gaitenc
