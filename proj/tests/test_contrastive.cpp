#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "gaitenc/contrastive.hpp"
#include "gaitenc/grad_check.hpp"
#include "gaitenc/rng.hpp"
#include "support.hpp"

using namespace gaitenc;

namespace {

std::vector<Var> make_reps(Tape& tape, const std::vector<std::vector<double>>& vecs) {
  std::vector<Var> z;
  for (const auto& v : vecs) z.push_back(tape.leaf(Tensor({static_cast<int>(v.size())}, v)));
  return z;
}

}  // namespace

TEST_CASE("projection head maps V through two weight layers") {
  SECTION("zero weights give the zero vector") {
    ProjectionHead head("T", 4, 3, 2);
    Tape tape;
    GraphBinding bind(tape);
    Var v = tape.leaf(Tensor({4}, {1.0, -1.0, 2.0, 0.5}));
    const Tensor& z = tape.value(head.project(tape, bind, v));
    REQUIRE(z.size() == 2);
    REQUIRE(z[0] == 0.0);
    REQUIRE(z[1] == 0.0);
  }
  SECTION("identity-like 1x1 weights pass positive input through") {
    ProjectionHead head("T", 1, 1, 1);
    head.w1.value[0] = 1.0;
    head.w2.value[0] = 1.0;
    Tape tape;
    GraphBinding bind(tape);
    Var v = tape.leaf(Tensor({1}, {0.8}));
    REQUIRE(tape.value(head.project(tape, bind, v))[0] == Catch::Approx(0.8).margin(1e-15));
  }
  SECTION("random small case matches explicit two-step matrix arithmetic") {
    ProjectionHead head("T", 3, 2, 2);
    Rng rng(15);
    for (double& v : head.w1.value.data()) v = rng.uniform(-1, 1);
    for (double& v : head.w2.value.data()) v = rng.uniform(-1, 1);
    const std::vector<double> input = {0.4, -0.7, 1.2};

    std::vector<double> hidden(2, 0.0);
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 3; ++c) hidden[r] += head.w1.value.at(r, c) * input[c];
      hidden[r] = std::max(0.0, hidden[r]);
    }
    std::vector<double> expected(2, 0.0);
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) expected[r] += head.w2.value.at(r, c) * hidden[c];
    }

    Tape tape;
    GraphBinding bind(tape);
    Var z = head.project(tape, bind, tape.leaf(Tensor({3}, input)));
    REQUIRE(tape.value(z)[0] == Catch::Approx(expected[0]).margin(1e-12));
    REQUIRE(tape.value(z)[1] == Catch::Approx(expected[1]).margin(1e-12));
  }
  SECTION("width mismatch rejected") {
    ProjectionHead head("T", 4, 3, 2);
    Tape tape;
    GraphBinding bind(tape);
    REQUIRE_THROWS_AS(head.project(tape, bind, tape.leaf(Tensor({3}, {1, 2, 3}))),
                      std::invalid_argument);
  }
}

TEST_CASE("cosine similarity closed forms") {
  std::vector<double> z = {0.3, -0.4, 1.0};
  std::vector<double> neg = {-0.3, 0.4, -1.0};
  REQUIRE(cosine_similarity(z, z) == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(cosine_similarity(z, neg) == Catch::Approx(-1.0).margin(1e-12));
  std::vector<double> ex = {1.0, 0.0};
  std::vector<double> ey = {0.0, 2.0};
  REQUIRE(cosine_similarity(ex, ey) == Catch::Approx(0.0).margin(1e-12));
  std::vector<double> zero = {0.0, 0.0};
  REQUIRE_THROWS_AS(cosine_similarity(ex, zero), std::invalid_argument);
}

TEST_CASE("lcl loss: n=2 has a single-candidate denominator and zero loss") {
  Tape tape;
  auto z = make_reps(tape, {{1.0, 0.2}, {-0.4, 0.9}});
  REQUIRE(tape.value(lcl_loss(tape, z, 0.1))[0] == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("lcl loss: all-identical n=3 batch gives log 3 at any temperature") {
  for (double tau : {0.05, 0.1, 0.5, 1.0}) {
    Tape tape;
    auto z = make_reps(tape, {{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}});
    REQUIRE(tape.value(lcl_loss(tape, z, tau))[0] ==
            Catch::Approx(std::log(3.0)).margin(1e-9));
  }
}

TEST_CASE("lcl loss: dominant positives drive the loss toward zero") {
  // positive pairs identical (sim 1), negatives opposite (sim -1), tau = 0.1
  Tape tape;
  auto z = make_reps(tape, {{1.0, 0.0}, {-1.0, 0.0}, {1.0, 0.0}, {-1.0, 0.0}});
  // z layout: pairs (0,2) and (1,3); sim(0,2)=1, sim(1,3)=1, cross sims -1
  REQUIRE(tape.value(lcl_loss(tape, z, 0.1))[0] < 0.01);
}

TEST_CASE("lcl loss rejects bad arguments") {
  Tape tape;
  auto z = make_reps(tape, {{1.0, 0.0}, {0.0, 1.0}});
  REQUIRE_THROWS_AS(lcl_loss(tape, z, 0.0), std::invalid_argument);
  auto z1 = make_reps(tape, {{1.0, 0.0}});
  REQUIRE_THROWS_AS(lcl_loss(tape, z1, 0.1), std::invalid_argument);
}

TEST_CASE("lcl loss is invariant to uniform positive rescaling") {
  Rng rng(27);
  std::vector<std::vector<double>> vecs(6, std::vector<double>(4));
  for (auto& v : vecs) {
    for (double& x : v) x = rng.uniform(-1, 1);
  }
  Tape t1;
  const double base = t1.value(lcl_loss(t1, make_reps(t1, vecs), 0.2))[0];
  for (double scale : {0.1, 3.0, 42.0}) {
    auto scaled = vecs;
    for (auto& v : scaled) {
      for (double& x : v) x *= scale;
    }
    Tape t2;
    REQUIRE(t2.value(lcl_loss(t2, make_reps(t2, scaled), 0.2))[0] ==
            Catch::Approx(base).margin(1e-9));
  }
}

TEST_CASE("decreasing tau sharpens a batch whose positives dominate") {
  Rng rng(99);
  // positives clearly most similar
  std::vector<std::vector<double>> vecs = {
      {1.0, 0.05}, {-0.8, 0.6}, {0.98, 0.02}, {-0.82, 0.58}};
  double prev = 1e300;
  for (double tau : {1.0, 0.8, 0.5, 0.1, 0.05}) {
    Tape tape;
    const double val = tape.value(lcl_loss(tape, make_reps(tape, vecs), tau))[0];
    REQUIRE(val <= prev + 1e-12);
    prev = val;
  }
}

TEST_CASE("lcl gradients through projection and model match finite differences") {
  GaitModelDim dm(Dim3::X, 3, 2, 2, 1, AttentionMode::BAS, true, /*proj_hidden=*/8);
  dm.init(2025);
  auto samples = testsup::sample_batch(PretextTask::ReverseReconstruction, 3, 3, 2, 19);
  const LossWeights w{0.0, 0.0, 1.0, 0.0};  // isolate L_C
  auto loss_fn = [&]() { return testsup::combined_loss(dm, samples, w, 0.3, true, false).total; };
  auto grads = [&]() { testsup::combined_loss(dm, samples, w, 0.3, true, true); };
  GradCheckReport report = grad_check(dm.parameters(), loss_fn, grads, 1e-5);
  REQUIRE(report.all_below(1e-4));
}

TEST_CASE("make_batches partitions a timeline and drops the remainder") {
  auto windows = split_recording(testsup::synthetic_recording(1, 14, 2, 3), 4, 0, 1);
  REQUIRE(windows.size() == 11);
  windows.resize(10);

  SECTION("10 sequences, n=4, interval=1 -> 2 batches, 2 dropped") {
    auto batches = make_batches(windows, 4, 1);
    REQUIRE(batches.size() == 2);
    REQUIRE(batches[0] == std::vector<int>{0, 1, 2, 3});
    REQUIRE(batches[1] == std::vector<int>{4, 5, 6, 7});
  }
  SECTION("interval=2 spaces members by two seq indices") {
    auto batches = make_batches(windows, 4, 2);
    REQUIRE(batches.size() == 1);
    REQUIRE(batches[0] == std::vector<int>{0, 2, 4, 6});
    for (std::size_t i = 1; i < batches[0].size(); ++i) {
      REQUIRE(windows[batches[0][i]].seq_index - windows[batches[0][i - 1]].seq_index == 2);
    }
  }
  SECTION("n=2 with exactly 2 sequences -> 1 batch") {
    std::vector<SkeletonSequence> two(windows.begin(), windows.begin() + 2);
    auto batches = make_batches(two, 2, 1);
    REQUIRE(batches.size() == 1);
  }
  SECTION("fewer sequences than n -> no batches") {
    std::vector<SkeletonSequence> three(windows.begin(), windows.begin() + 3);
    REQUIRE(make_batches(three, 4, 1).empty());
  }
  SECTION("argument validation") {
    REQUIRE_THROWS_AS(make_batches(windows, 1, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(make_batches(windows, 2, 0), std::invalid_argument);
  }
}
