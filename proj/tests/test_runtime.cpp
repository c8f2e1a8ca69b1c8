#include <doctest.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <numbers>

#include "noisyq/runtime.hpp"
#include "noisyq/search.hpp"
#include "reference.hpp"

using namespace noisyq;

TEST_CASE("noiseless Grover matches the closed form") {
  for (std::size_t n : {4, 16}) {
    const auto top = static_cast<std::size_t>(std::floor(std::numbers::pi / 4 * std::sqrt(double(n))));
    for (std::size_t t = 0; t <= top; ++t) {
      const auto alg = grover_algorithm(n, t);
      const double ref = static_cast<double>(reference::grover_closed_form(n, 1, t));
      for (std::size_t x : {std::size_t{0}, n - 1}) {
        const auto r = run_exact(alg, TruthTable::unique_marked(n, x), NoiseSpec());
        CHECK(r.result.success_probability == doctest::Approx(ref).epsilon(1e-12));
        CHECK(r.result.queries_used == t);
      }
    }
  }
  // Frozen value: n = 16, three iterations.
  const auto r = run_exact(grover_algorithm(16, 3), TruthTable::unique_marked(16, 5), NoiseSpec());
  CHECK(r.result.success_probability == doctest::Approx(0.96131896972656).epsilon(1e-12));
}

TEST_CASE("noise never helps Grover at n = 4") {
  const auto alg = grover_algorithm(4, 1);
  double prev = 2.0;
  for (double p : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const double s = average_success(alg, InstanceFamily::unique_marked(), NoiseSpec(NoiseKind::Dephasing, p));
    CHECK(s <= prev + 1e-12);
    prev = s;
  }
  // Complete dephasing after one query leaves a uniform Qi.
  CHECK(prev == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("exact states stay normalized and Hermitian") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto alg = random_algorithm(3, 2, 2, 1, seed % 2 == 0, seed);
    CHECK_NOTHROW(alg.validate());
    const auto r = run_exact(alg, TruthTable::unique_marked(3, 1), NoiseSpec(NoiseKind::Depolarizing, 0.3, alg.signaling));
    CHECK(std::abs(r.final_state.matrix.trace() - 1.0) < 1e-12);
    CHECK(max_abs(Matrix(r.final_state.matrix - r.final_state.matrix.adjoint())) < 1e-12);
    CHECK(r.result.success_probability >= -1e-12);
    CHECK(r.result.success_probability <= 1.0 + 1e-12);
  }
}

TEST_CASE("trajectory success agrees with exact evolution (n = 4, tau = 1, p = 0.5 dephasing)") {
  const auto alg = grover_algorithm(4, 1);
  const NoiseSpec spec(NoiseKind::Dephasing, 0.5);
  const auto f = TruthTable::unique_marked(4, 2);
  const double exact = run_exact(alg, f, spec).result.success_probability;
  const std::size_t shots = 100000;
  std::size_t hits = 0;
  for (std::size_t s = 0; s < shots; ++s) hits += run_trajectory(alg, f, spec, s).success;
  const double mean = double(hits) / double(shots);
  const double se = std::sqrt(exact * (1 - exact) / double(shots));
  CHECK(std::abs(mean - exact) <= 3 * se);
}

TEST_CASE("signaling runs with ignored flags match concealing runs") {
  for (std::uint64_t seed : {4, 5}) {
    const auto con = random_algorithm(3, 2, 2, 1, false, seed);
    const auto sig = with_ignored_flags(con);
    CHECK(sig.signaling);
    CHECK_NOTHROW(sig.validate());
    const auto f = TruthTable::unique_marked(3, 0);
    for (auto kind : {NoiseKind::Depolarizing, NoiseKind::Dephasing}) {
      const double a = run_exact(con, f, NoiseSpec(kind, 0.4)).result.success_probability;
      const double b = run_exact(sig, f, NoiseSpec(kind, 0.4, true)).result.success_probability;
      CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
  }
}

TEST_CASE("random-function averages enumerate small families") {
  const auto alg = random_algorithm(2, 2, 1, 0, false, 3);
  const NoiseSpec spec(NoiseKind::Depolarizing, 0.2);
  double sum = 0;
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b)
      sum += run_exact(alg, TruthTable(2, 2, {a, b}, 0), spec).result.success_probability;
  CHECK(average_success(alg, InstanceFamily::uniform_random(), spec) == doctest::Approx(sum / 4).epsilon(1e-12));
  const auto big = random_algorithm(7, 4, 0, 0, false, 3);
  CHECK_THROWS(average_success(big, InstanceFamily::uniform_random(0), NoiseSpec()));
  CHECK_NOTHROW(average_success(big, InstanceFamily::uniform_random(10, 1), NoiseSpec()));
}

TEST_CASE("algorithm JSON round trip") {
  nlohmann::json j = {{"n", 4}, {"m", 2}, {"tau", 1}, {"initial", "uniform_minus"},
                      {"repeat_step", {{{"gate", "diffusion"}, {"registers", {"Qi"}}}}}};
  const auto alg = algorithm_from_json(j);
  CHECK(alg.tau == 1);
  for (std::size_t x = 0; x < 4; ++x) {
    const auto f = TruthTable::unique_marked(4, x);
    CHECK(run_exact(alg, f, NoiseSpec()).result.success_probability == doctest::Approx(1.0).epsilon(1e-12));
  }
  nlohmann::json bad = {{"n", 2}, {"m", 2}, {"tau", 1}, {"initial", {{"basis", 0}}},
                        {"steps", {{{{"gate", "dense"}, {"registers", {"Qi"}}, {"matrix", {{{2, 0}, {0, 0}}, {{0, 0}, {1, 0}}}}}}}}};
  CHECK_THROWS_AS(algorithm_from_json(bad), Error);
}

TEST_CASE("validate rejects mismatched specs") {
  auto alg = grover_algorithm(4, 2);
  alg.steps.pop_back();
  CHECK_THROWS_AS(alg.validate(), Error);
  auto alg2 = random_algorithm(3, 2, 1, 0, false, 1);
  std::get<Matrix>(alg2.steps[0])(0, 0) += 0.1;
  CHECK_THROWS_AS(alg2.validate(), Error);
}
