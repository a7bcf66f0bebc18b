#include <doctest.h>

#include <cmath>

#include "selfprop/error.hpp"
#include "selfprop/predictor.hpp"

using namespace selfprop;

TEST_CASE("delay latch emits the value from depth pushes ago") {
  DelayLatch d(2);
  CHECK_FALSE(d.push(10).has_value());
  CHECK_FALSE(d.push(11).has_value());
  CHECK(d.warm());
  CHECK(d.push(12) == 10u);
  CHECK(d.push(13) == 11u);
  CHECK_THROWS_AS(DelayLatch(0), InvalidInput);
}

TEST_CASE("detrending a uniform clock gives a constant") {
  DelayLatch d(3);
  std::optional<Word> first;
  for (Word t = 250; t < 250 + 40; ++t) {
    const auto v = detrend_time(t & 0xff, d, 8);
    if (!v) continue;
    if (!first) first = v;
    CHECK(*v == 3u);  // wraps through 255 -> 0 without a jump
  }
  CHECK(first.has_value());
  DelayLatch x(1);
  detrend_time(0b1010, x, 4, DetrendMode::Xor);
  CHECK(detrend_time(0b0110, x, 4, DetrendMode::Xor) == 0b1100u);
}

TEST_CASE("table model argmax with ties to the smaller word") {
  TableModel t(1, 1, 8);
  t.observe({3}, {9});
  t.observe({3}, {4});
  CHECK(t.lookup({3}) == StateVector{4});
  t.observe({3}, {9});
  CHECK(t.lookup({3}) == StateVector{9});
  CHECK(t.count({3}, 0, 9) == 2);
  CHECK_FALSE(t.lookup({4}).has_value());
  CHECK_THROWS_AS(t.observe({1, 2}, {3}), InvalidInput);
}

TEST_CASE("table model text round trip") {
  TableModel t(2, 2, 4);
  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    const StateVector c{static_cast<Word>(rng.below(4)), static_cast<Word>(rng.below(4))};
    t.observe(c, {static_cast<Word>(rng.below(16)), static_cast<Word>(rng.below(16))});
  }
  const TableModel u = TableModel::from_text(t.to_text());
  CHECK(u.to_text() == t.to_text());
  for (Word a = 0; a < 4; ++a) {
    for (Word b = 0; b < 4; ++b) CHECK(u.lookup({a, b}) == t.lookup({a, b}));
  }
  CHECK_THROWS_AS(TableModel::from_text("tabel 1 1 8\n"), InvalidInput);
  CHECK_THROWS_AS(TableModel::from_text("table 1 1 8\n1 2 x\n"), InvalidInput);
}

TEST_CASE("residual and reconstruct are inverse") {
  Rng rng(32);
  const PredictorModel m(CircuitModel(random_circuit(8, 10, rng), 2, 4));
  for (int i = 0; i < 300; ++i) {
    const StateVector prev{static_cast<Word>(rng.below(16)), static_cast<Word>(rng.below(16))};
    const StateVector now{static_cast<Word>(rng.below(16)), static_cast<Word>(rng.below(16))};
    const Residual z = residual(m, now, prev, 7);
    CHECK(z.timestamp == 7);
    CHECK(reconstruct(m, z, prev) == now);
  }
}

TEST_CASE("exact model gives zero residuals") {
  // x -> x + 5 mod 16, realised as a table learned from one pass.
  TableModel t(1, 1, 4);
  for (Word x = 0; x < 16; ++x) update_table(t, {x}, {(x + 5) & 0xf});
  const PredictorModel m(t);
  for (Word x = 0; x < 16; ++x) CHECK(residual(m, {(x + 5) & 0xf}, {x}).z == StateVector{0});
}

TEST_CASE("circuit model width must be K*w") {
  CHECK_THROWS_AS(CircuitModel(ReversibleCircuit(5), 2, 3), InvalidInput);
  CHECK_NOTHROW(CircuitModel(ReversibleCircuit(6), 2, 3));
}

TEST_CASE("flow split") {
  const std::vector<double> rates{0.95, 0.5, 0.9, 0.89};
  const FlowSplit f = split_flows(rates, 0.9);
  CHECK(f.green == std::vector<std::size_t>{0, 2});
  CHECK(f.purple == std::vector<std::size_t>{1, 3});
}

TEST_CASE("confidence estimate from histories") {
  const std::vector<std::uint8_t> all(100, 1);
  CHECK(estimate_confidence(all).q == 1.0 - 1e-9);
  std::vector<std::uint8_t> half(100, 0);
  for (int i = 0; i < 50; ++i) half[i] = 1;
  CHECK(estimate_confidence(half).q == 0.5);
  std::vector<std::uint8_t> tenth(100, 0);
  for (int i = 0; i < 10; ++i) tenth[i] = 1;
  const BitConfidence b = estimate_confidence(tenth);
  CHECK(b.flipped);
  CHECK(b.q == doctest::Approx(0.9));
  CHECK_THROWS_AS(estimate_confidence(std::vector<std::uint8_t>{}), InvalidInput);
}

TEST_CASE("flipped polarity predicts one") {
  ConfidenceEstimate e;
  e.bits = {{0.9, true}, {0.8, false}, {0.5, false}};
  CHECK(e.predicted_word() == 0b001u);
  CHECK(e.stops() == std::vector<double>{0.9, 0.8, 0.5});
}

TEST_CASE("sliding tracker agrees with the batch estimate") {
  Rng rng(33);
  ConfidenceTracker tr(4, 50);
  std::vector<Word> zs;
  for (int i = 0; i < 400; ++i) {
    const Word z = static_cast<Word>(rng.below(16)) & static_cast<Word>(rng.below(16));
    tr.record(z);
    zs.push_back(z);
    const std::size_t from = zs.size() > 50 ? zs.size() - 50 : 0;
    std::vector<std::vector<std::uint8_t>> hist(4);
    for (std::size_t j = from; j < zs.size(); ++j) {
      for (unsigned b = 0; b < 4; ++b) hist[b].push_back(((zs[j] >> b) & 1u) == 0);
    }
    const ConfidenceEstimate batch = estimate_confidence(hist);
    const ConfidenceEstimate online = tr.estimate();
    for (unsigned b = 0; b < 4; ++b) {
      CHECK(online.bits[b].q == doctest::Approx(batch.bits[b].q));
      CHECK(online.bits[b].flipped == batch.bits[b].flipped);
    }
  }
}

TEST_CASE("confidence calibration with noise Q=0.9") {
  Rng rng(34);
  const std::size_t n = 10000;
  ConfidenceTracker tr(8, n);
  const NoiseChannel ch{0.9};
  for (std::size_t i = 0; i < n; ++i) tr.record(apply_noise(ch, 0, 8, rng));
  const double se = std::sqrt(0.09 / n);
  for (const BitConfidence& b : tr.estimate().bits) CHECK(std::abs(b.q - 0.9) <= 3 * se);
}

TEST_CASE("predict: unseen contexts and cold trackers bet nothing") {
  TableModel t(1, 1, 4);
  t.observe({1}, {7});
  const PredictorModel m(t);
  ConfidenceTracker tr(4, 3);
  Prediction p = predict(m, {2}, tr);
  CHECK_FALSE(p.seen);
  CHECK(p.state == StateVector{0});
  for (const auto& b : p.confidence.bits) CHECK(b.q == 0.5);

  tr.record(0);
  p = predict(m, {1}, tr);
  CHECK(p.seen);
  CHECK(p.state == StateVector{7});
  for (const auto& b : p.confidence.bits) CHECK(b.q == 0.5);  // window not yet full

  tr.record(0);
  tr.record(0);
  p = predict(m, {1}, tr);
  for (const auto& b : p.confidence.bits) CHECK(b.q == 1.0 - 1e-9);
}

TEST_CASE("residual stats") {
  ResidualStats s(2, 4);
  s.record({0, 1});
  s.record({0, 0});
  s.record({3, 0});
  s.record({0, 0});
  CHECK(s.zero_rates() == std::vector<double>{0.75, 0.75});
  s.record({1, 0});
  CHECK(s.zero_rates() == std::vector<double>{0.5, 1.0});
}
