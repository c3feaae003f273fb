#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "gaitenc/evaluation.hpp"
#include "gaitenc/rng.hpp"

using namespace gaitenc;

namespace {

// O(N^2) re-implementation used as the metric oracle
CmcCurve brute_force_cmc(const std::vector<std::vector<int>>& rankings,
                         const std::vector<int>& truth) {
  const int g = static_cast<int>(rankings.front().size());
  CmcCurve curve;
  for (int k = 1; k <= g; ++k) {
    int hit = 0;
    for (std::size_t p = 0; p < rankings.size(); ++p) {
      for (int r = 0; r < k; ++r) {
        if (rankings[p][r] == truth[p]) {
          ++hit;
          break;
        }
      }
    }
    curve.values.push_back(static_cast<double>(hit) / rankings.size());
  }
  return curve;
}

GaitEncoding enc_of(int identity, std::vector<double> v, int seq = 0) {
  GaitEncoding e;
  e.identity = identity;
  e.seq_index = seq;
  e.frames = 1;
  e.vec = std::move(v);
  return e;
}

}  // namespace

TEST_CASE("cmc: perfect ranking gives the all-ones curve") {
  std::vector<std::vector<int>> rankings = {{1, 2, 3}, {2, 1, 3}, {3, 1, 2}};
  std::vector<int> truth = {1, 2, 3};
  CmcCurve c = cmc(rankings, truth);
  for (double v : c.values) REQUIRE(v == 1.0);
  REQUIRE(c.rank1_percent() == 100.0);
}

TEST_CASE("cmc: staircase ranks count correctly") {
  // true identities land at ranks 1, 2, 3
  std::vector<std::vector<int>> rankings = {{1, 2, 3}, {1, 2, 3}, {1, 2, 3}};
  std::vector<int> truth = {1, 2, 3};
  CmcCurve c = cmc(rankings, truth);
  REQUIRE(c.values[0] == Catch::Approx(1.0 / 3.0));
  REQUIRE(c.values[1] == Catch::Approx(2.0 / 3.0));
  REQUIRE(c.values[2] == 1.0);
}

TEST_CASE("cmc is non-decreasing and ends at one") {
  Rng rng(8);
  std::vector<std::vector<int>> rankings;
  std::vector<int> truth;
  for (int p = 0; p < 40; ++p) {
    auto perm = rng.permutation(7);
    std::vector<int> ids(7);
    for (int i = 0; i < 7; ++i) ids[i] = perm[i] + 1;
    rankings.push_back(ids);
    truth.push_back(rng.uniform_int(1, 7));
  }
  CmcCurve c = cmc(rankings, truth);
  for (std::size_t k = 1; k < c.values.size(); ++k) REQUIRE(c.values[k] >= c.values[k - 1]);
  REQUIRE(c.values.back() == 1.0);
  // equals brute force everywhere
  CmcCurve oracle = brute_force_cmc(rankings, truth);
  for (std::size_t k = 0; k < c.values.size(); ++k) REQUIRE(c.values[k] == oracle.values[k]);
}

TEST_CASE("cmc of random rankings approaches k/G") {
  Rng rng(123);
  const int g = 5;
  std::vector<std::vector<int>> rankings;
  std::vector<int> truth;
  for (int p = 0; p < 4000; ++p) {
    auto perm = rng.permutation(g);
    std::vector<int> ids(g);
    for (int i = 0; i < g; ++i) ids[i] = perm[i] + 1;
    rankings.push_back(ids);
    truth.push_back(rng.uniform_int(1, g));
  }
  CmcCurve c = cmc(rankings, truth);
  for (int k = 1; k <= g; ++k) {
    REQUIRE(c.values[k - 1] == Catch::Approx(static_cast<double>(k) / g).margin(0.05));
  }
}

TEST_CASE("cmc rejects probes whose identity is missing from the gallery") {
  std::vector<std::vector<int>> rankings = {{1, 2}};
  std::vector<int> truth = {3};
  REQUIRE_THROWS_WITH(cmc(rankings, truth), Catch::Matchers::ContainsSubstring("absent"));
}

TEST_CASE("nauc closed forms") {
  SECTION("all-ones curve -> 1.0") {
    CmcCurve c;
    c.values = {1.0, 1.0, 1.0};
    REQUIRE(nauc(c) == 1.0);
  }
  SECTION("linear curve k/G -> (G+1)/(2G), exact for power-of-two G") {
    const int g = 8;
    CmcCurve c;
    for (int k = 1; k <= g; ++k) c.values.push_back(static_cast<double>(k) / g);
    REQUIRE(nauc(c) == (g + 1.0) / (2.0 * g));
  }
  SECTION("G=2 with CMC=(0.5, 1) -> 0.75") {
    CmcCurve c;
    c.values = {0.5, 1.0};
    REQUIRE(nauc(c) == 0.75);
  }
  SECTION("empty curve rejected") {
    REQUIRE_THROWS_AS(nauc(CmcCurve{}), std::invalid_argument);
  }
  SECTION("monotone under pointwise improvement") {
    CmcCurve a, b;
    a.values = {0.3, 0.6, 1.0};
    b.values = {0.4, 0.6, 1.0};
    REQUIRE(nauc(b) > nauc(a));
  }
}

TEST_CASE("match_gallery follows Euclidean nearest identity") {
  SECTION("exact probe vector in gallery matches at distance zero") {
    std::vector<GaitEncoding> gallery = {enc_of(1, {0.0, 0.0}), enc_of(2, {10.0, 10.0})};
    std::vector<GaitEncoding> probes = {enc_of(1, {0.0, 0.0})};
    REQUIRE(match_gallery(probes, gallery).rank1 == 100.0);
  }
  SECTION("probe (1,1) with identities at (0,0) and (10,10) goes to identity 1") {
    std::vector<GaitEncoding> gallery = {enc_of(1, {0.0, 0.0}), enc_of(2, {10.0, 10.0})};
    std::vector<GaitEncoding> probes = {enc_of(1, {1.0, 1.0})};
    MatchResult r = match_gallery(probes, gallery);
    REQUIRE(r.rank1 == 100.0);
    REQUIRE(r.curve.values[0] == 1.0);
  }
  SECTION("multi-shot galleries score identities by their closest sequence") {
    std::vector<GaitEncoding> gallery = {enc_of(1, {0.0, 0.0}, 0), enc_of(1, {8.0, 8.0}, 1),
                                         enc_of(2, {3.0, 3.0}, 0)};
    std::vector<GaitEncoding> probes = {enc_of(1, {0.5, 0.5})};
    REQUIRE(match_gallery(probes, gallery).rank1 == 100.0);
  }
  SECTION("width mismatch rejected") {
    std::vector<GaitEncoding> gallery = {enc_of(1, {0.0, 0.0})};
    std::vector<GaitEncoding> probes = {enc_of(1, {0.0, 0.0, 0.0})};
    REQUIRE_THROWS_AS(match_gallery(probes, gallery), std::invalid_argument);
  }
}

TEST_CASE("match_gallery equals an exhaustive pairwise-distance oracle") {
  Rng rng(404);
  const int identities = 6, width = 4;
  std::vector<GaitEncoding> gallery, probes;
  for (int id = 1; id <= identities; ++id) {
    for (int s = 0; s < 3; ++s) {
      std::vector<double> v(width);
      for (double& x : v) x = rng.uniform(-1, 1) + id;
      gallery.push_back(enc_of(id, v, s));
    }
  }
  for (int p = 0; p < 50; ++p) {
    const int id = rng.uniform_int(1, identities);
    std::vector<double> v(width);
    for (double& x : v) x = rng.uniform(-1.5, 1.5) + id;
    probes.push_back(enc_of(id, v, p));
  }

  int oracle_hits = 0;
  for (const auto& p : probes) {
    double best_d = 1e300;
    int best_id = 0;
    for (const auto& g : gallery) {
      double d = 0;
      for (int i = 0; i < width; ++i) d += (p.vec[i] - g.vec[i]) * (p.vec[i] - g.vec[i]);
      if (d < best_d || (d == best_d && g.identity < best_id)) {
        best_d = d;
        best_id = g.identity;
      }
    }
    if (best_id == p.identity) ++oracle_hits;
  }
  MatchResult r = match_gallery(probes, gallery);
  REQUIRE(r.rank1 == Catch::Approx(100.0 * oracle_hits / probes.size()).margin(1e-12));
}

TEST_CASE("evaluate_classifier ranks classes by probability with label tie-break") {
  // build a tiny trained recognizer over separable data
  Rng rng(900);
  std::vector<GaitEncoding> train_set, test_set;
  const int classes = 4;
  for (int c = 1; c <= classes; ++c) {
    for (int i = 0; i < 8; ++i) {
      std::vector<double> v(6);
      for (int w = 0; w < 6; ++w) v[w] = ((w % classes) == c - 1 ? 1.5 : -0.5) + rng.normal(0, 0.05);
      GaitEncoding e = enc_of(c, v, i);
      (i < 6 ? train_set : test_set).push_back(e);
    }
  }
  RecognizerConfig cfg;
  cfg.hidden = 16;
  cfg.epochs = 30;
  RecognitionNet net = train_recognizer(train_set, classes, ReidStrategy::SC, cfg);
  EvalResult r = evaluate_classifier(net, test_set, ReidStrategy::SC);
  REQUIRE(r.rank1 == 100.0);
  REQUIRE(r.nauc == 100.0);

  // brute-force recomputation from the raw probabilities
  std::vector<std::vector<int>> rankings;
  std::vector<int> truth;
  for (const auto& e : test_set) {
    auto dist = predict_sequence(net, e, ReidStrategy::SC);
    std::vector<int> order(classes);
    for (int c = 0; c < classes; ++c) order[c] = c + 1;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (dist[a - 1] != dist[b - 1]) return dist[a - 1] > dist[b - 1];
      return a < b;
    });
    rankings.push_back(order);
    truth.push_back(e.identity);
  }
  CmcCurve oracle = brute_force_cmc(rankings, truth);
  for (std::size_t k = 0; k < oracle.values.size(); ++k) {
    REQUIRE(r.curve.values[k] == oracle.values[k]);
  }
}

TEST_CASE("a uniform classifier scores near chance rank-1") {
  // untrained recognizer with zero weights ties every class; tie-break by
  // ascending label means rank-1 hits exactly the probes labelled 1
  const int classes = 5;
  RecognitionNet net(4, 8, classes);
  Rng rng(31);
  std::vector<GaitEncoding> probes;
  for (int p = 0; p < 200; ++p) {
    std::vector<double> v(4);
    for (double& x : v) x = rng.uniform(-1, 1);
    probes.push_back(enc_of(rng.uniform_int(1, classes), v, p));
  }
  EvalResult r = evaluate_classifier(net, probes, ReidStrategy::SC);
  REQUIRE(r.rank1 == Catch::Approx(100.0 / classes).margin(5.0));
}

TEST_CASE("window attention mass of the uniform matrix is the window fraction") {
  const int f = 6, d = 2;
  Tensor uniform({f, f});
  for (int r = 0; r < f; ++r) {
    for (int c = 0; c < f; ++c) uniform.at(r, c) = 1.0 / f;
  }
  // expected: mean over t of |window ∩ [1,f]| / f = (3+4+5+5+4+3)/36
  REQUIRE(window_attention_mass(uniform, d) == Catch::Approx(24.0 / 36.0).margin(1e-12));
}
