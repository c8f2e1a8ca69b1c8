#include <doctest.h>

#include <cmath>

#include "noisyq/lowerbound.hpp"
#include "reference.hpp"

using namespace noisyq;

namespace {

const CheckRow& row(const std::vector<CheckRow>& rows, const std::string& name) {
  for (const auto& r : rows)
    if (r.name == name) return r;
  FAIL("missing row " << name);
  return rows.front();
}

double ref_claim53(std::size_t n, std::size_t t) {
  reference::WorstCase w{n};
  const reference::Matrix in = w.apply(reference::WorstCase::A, 2, t, reference::Matrix::Identity(w.dim(2, t), w.dim(2, t)));
  const reference::Matrix o = w.oracle(false, t) * in;
  return reference::WorstCase::norm(w.apply(reference::WorstCase::BAct, 4, t + 1, o));
}

double ref_claim54_squared(std::size_t n, std::size_t t) {
  reference::WorstCase w{n};
  const reference::Matrix in = w.apply(reference::WorstCase::A, 2, t, reference::Matrix::Identity(w.dim(2, t), w.dim(2, t)));
  const reference::Matrix o = w.oracle(true, t) * in;
  const double v = reference::WorstCase::norm(w.apply(reference::WorstCase::C, 4, t + 1, o));
  return v * v;
}

}  // namespace

TEST_CASE("records encode and decode") {
  for (std::size_t i = 0; i < 5 * 5 * 5; ++i) {
    const auto r = Record::decode(i, 4, 3);
    CHECK(r.encode(4) == i);
  }
  const auto r = Record::decode(1 * 25 + 0 * 5 + 3, 4, 3);  // (x=0, ⊥, x=2)
  CHECK(r.symbols == std::vector<std::size_t>{1, 0, 3});
  CHECK(r.support() == 0b101);
  CHECK(r.unrecorded(4) == 2);
  CHECK(r.appended(0).encode(4) == r.encode(4) * 5);
}

TEST_CASE("reference oracle reproduces the frozen norms") {
  // Closed forms 2√(n−t−1)/(n−t) and 1/(n−t).
  CHECK(ref_claim53(5, 1) == doctest::Approx(0.8660254037844386).epsilon(1e-12));
  CHECK(ref_claim53(4, 0) == doctest::Approx(2 * std::sqrt(3.0) / 4).epsilon(1e-12));
  CHECK(ref_claim54_squared(4, 0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(ref_claim54_squared(5, 1) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("library norms agree with the reference construction") {
  for (std::size_t n : {3, 4, 5})
    for (std::size_t t : {0, 1}) {
      if (n == 5 && t == 1) continue;  // covered above, keeps the suite fast
      const auto rows = verify_claim_norms(t, n, 2, Mode::WorstCase);
      CHECK(row(rows, "claim5.3.norm").computed == doctest::Approx(ref_claim53(n, t)).epsilon(1e-10));
      CHECK(row(rows, "claim5.4.norm_squared").computed == doctest::Approx(ref_claim54_squared(n, t)).epsilon(1e-10));
    }
  const auto rows = verify_claim_norms(1, 5, 2, Mode::WorstCase);
  CHECK(row(rows, "claim5.3.norm").computed == doctest::Approx(0.8660254037844386).epsilon(1e-10));
  CHECK(row(rows, "claim5.3.norm").pass);
  const auto r4 = verify_claim_norms(0, 4, 2, Mode::WorstCase);
  CHECK(row(r4, "claim5.4.norm_squared").computed == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("random-function norm at m = 4") {
  const auto rows = verify_claim_norms(0, 3, 4, Mode::RandomFunction);
  CHECK(row(rows, "claimA.3.norm").computed == doctest::Approx(std::sqrt(5.0) / 3).epsilon(1e-10));
  CHECK(row(rows, "claimA.4.norm").computed == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(all_pass(rows));
}

TEST_CASE("identities hold at n = 4, t = 1 and random-function n = 3, m = 2, t = 1") {
  const auto w = verify_claim_identities(1, 4, 2, Mode::WorstCase);
  for (const auto& r : w) {
    INFO(r.name);
    CHECK(r.pass);
    CHECK(r.residual <= 1e-10);
  }
  const auto rf = verify_claim_identities(1, 3, 2, Mode::RandomFunction);
  std::size_t a2 = 0;
  for (const auto& r : rf) {
    INFO(r.name);
    CHECK(r.pass);
    if (r.name.rfind("claimA.2", 0) == 0) {
      ++a2;
      CHECK(r.residual <= 1e-10);
    }
  }
  CHECK(a2 >= 4);
}

TEST_CASE("projectors resolve the identity and are orthogonal") {
  for (auto [mode, n, m] : std::vector<std::tuple<Mode, std::size_t, std::size_t>>{
           {Mode::WorstCase, 4, 2}, {Mode::RandomFunction, 2, 4}}) {
    ProjectorFamily fam(mode, n, m);
    for (std::size_t t = 0; t <= 2; ++t) {
      const Matrix a = fam.materialize(Subspace::A, t), b = fam.materialize(Subspace::B, t),
                   c = fam.materialize(Subspace::C, t);
      const auto d = a.rows();
      CHECK(max_abs(Matrix(a + b + c - Matrix::Identity(d, d))) < 1e-12);
      CHECK(max_abs(Matrix(a * b)) < 1e-12);
      CHECK(max_abs(Matrix(b * c)) < 1e-12);
      CHECK(max_abs(Matrix(a * a - a)) < 1e-12);
    }
  }
}

TEST_CASE("progress measure of one Grover query at n = 4") {
  const auto run = run_extended(grover_algorithm(4, 1), 0.0, Mode::WorstCase);
  REQUIRE(run.trace.steps.size() == 2);
  CHECK(std::abs(run.trace.steps[0].psi) <= 1e-10);
  CHECK(run.trace.steps[1].psi == doctest::Approx(3.0 * 4 * 3 / 16).epsilon(1e-12));
  CHECK(run.trace.q_succ == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("per-step inequalities on random algorithms") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto a = random_algorithm(5, 2, 3, 1, seed % 2 == 1, 500 + seed);
    const auto rows = verify_lemma_inequalities(a, 0.5, Mode::WorstCase);
    CHECK(all_pass(rows));
    CHECK(row(rows, "psi_0").computed == doctest::Approx(0.0));
  }
  const auto a = random_algorithm(3, 4, 2, 1, true, 9);
  CHECK(all_pass(verify_lemma_inequalities(a, 0.25, Mode::RandomFunction)));
  CHECK_THROWS(verify_lemma_inequalities(random_algorithm(4, 2, 3, 0, true, 1), 0.5, Mode::WorstCase));
  CHECK_THROWS(verify_lemma_inequalities(random_algorithm(5, 2, 2, 0, true, 1), 0.0, Mode::WorstCase));
}

TEST_CASE("extended trace-out matches the averaged density simulation") {
  for (double p : {0.0, 0.5}) {
    const auto a = random_algorithm(4, 2, 2, 0, true, 31);
    const auto er = run_extended(a, p, Mode::WorstCase);
    const std::vector<std::string> drop{kF, record_register(1), record_register(2)};
    const auto red = reduced_density(er.final_state, drop);
    Matrix avg = Matrix::Zero(red.matrix.rows(), red.matrix.cols());
    for (std::size_t x = 0; x < 4; ++x)
      avg += run_exact(a, TruthTable::unique_marked(4, x), NoiseSpec(NoiseKind::Dephasing, p, true)).final_state.matrix / 4.0;
    CHECK(max_abs(Matrix(red.matrix - avg)) < 1e-12);
  }
}

TEST_CASE("traced extended call equals the signaling dephasing call") {
  Rng rng(17);
  const RegisterLayout q({{kQi, 4}, {kQo, 2}});
  for (double p : {0.0, 0.3, 1.0})
    for (std::size_t z = 0; z < 4; ++z) {
      const Vector v = random_unit_vector(8, rng);
      const DensityState rho(q, v * v.adjoint());
      const auto a = extended_call_traced(4, z, p, rho);
      const auto b = signaling_noisy_oracle_call(rho, TruthTable::unique_marked(4, z), NoiseSpec(NoiseKind::Dephasing, p, true));
      CHECK(a.layout == b.layout);
      CHECK(max_abs(Matrix(a.matrix - b.matrix)) < 1e-12);
    }
}

TEST_CASE("extended oracles are isometries with orthogonal images") {
  const auto ox = build_extended_oracles(1, 4, 2, Mode::WorstCase);
  const auto eye = [](Eigen::Index d) { return Matrix(Matrix::Identity(d, d)); };
  const Matrix q = ox.quantum, c = ox.classical, n = ox.noisy(0.3);
  CHECK(max_abs(Matrix(q.adjoint() * q - eye(q.cols()))) < 1e-12);
  CHECK(max_abs(Matrix(c.adjoint() * c - eye(c.cols()))) < 1e-12);
  CHECK(max_abs(Matrix(n.adjoint() * n - eye(n.cols()))) < 1e-12);
  CHECK(max_abs(Matrix(q.adjoint() * c)) < 1e-14);

  reference::WorstCase w{4};
  CHECK(max_abs(Matrix(q - w.oracle(false, 1))) < 1e-14);
  CHECK(max_abs(Matrix(c - w.oracle(true, 1))) < 1e-14);
}

TEST_CASE("amplitude cap is enforced") {
  CHECK_THROWS_AS(extended_oracle(ProjectorFamily(Mode::WorstCase, 6, 2), OracleBranch::Quantum, 3, 1, 1000),
                  CapExceededError);
  CHECK_THROWS_AS(run_extended(grover_algorithm(6, 2), 0.5, Mode::WorstCase, 1000), CapExceededError);
}

TEST_CASE("progress measure ignores unitaries on the algorithm registers") {
  Rng rng(44);
  for (auto [mode, n, m] : std::vector<std::tuple<Mode, std::size_t, std::size_t>>{
           {Mode::WorstCase, 5, 2}, {Mode::RandomFunction, 3, 4}}) {
    const auto run = run_extended(random_algorithm(n, m, 2, 1, true, 12), 0.4, mode);
    ProjectorFamily fam(mode, n, m);
    const auto& st = run.final_state;
    auto progress = [&](const PureState& s) { return fam.overlap(Subspace::C, s) + fam.scalar() * fam.overlap(Subspace::B, s); };
    const std::vector<std::string> alg{kQi, kQo, kW};
    const auto d = n * m * st.layout.dim(kW);
    const auto moved = embed_and_apply(st, random_unitary(d, rng), alg);
    CHECK(progress(moved) == doctest::Approx(progress(st)).epsilon(1e-10));
    CHECK(progress(st) == doctest::Approx(run.trace.steps.back().psi).epsilon(1e-10));
  }
}

TEST_CASE("rank-two identity and success-overlap rows are present and pass") {
  const auto ids = verify_claim_identities(1, 5, 2, Mode::WorstCase);
  CHECK(row(ids, "vectors.rank_two_identity").pass);
  CHECK(row(ids, "projectors.active_passive_split").pass);
  for (std::size_t t : {0, 1, 2}) {
    const auto norms = verify_claim_norms(t, 5, 2, Mode::WorstCase);
    CHECK(row(norms, "succ_times_A.norm").computed == doctest::Approx(1.0 / std::sqrt(5.0 - double(t))).epsilon(1e-10));
  }
  const auto rn = verify_claim_norms(1, 2, 4, Mode::RandomFunction);
  CHECK(row(rn, "succ_times_A.norm").computed == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("tracing flags as well recovers the concealing density run") {
  for (double p : {0.0, 0.5}) {
    const auto a = random_algorithm(4, 2, 2, 0, false, 8);
    const auto er = run_extended(a, p, Mode::WorstCase);
    const std::vector<std::string> drop{kF, kW, record_register(1), record_register(2)};
    const auto red = reduced_density(er.final_state, drop);
    Matrix avg = Matrix::Zero(8, 8);
    for (std::size_t x = 0; x < 4; ++x) {
      auto rho = run_exact(a, TruthTable::unique_marked(4, x), NoiseSpec(NoiseKind::Dephasing, p)).final_state;
      if (rho.layout.contains(kW)) {
        const std::vector<std::string> w{kW};
        rho = partial_trace(rho, w);
      }
      avg += rho.matrix / 4.0;
    }
    REQUIRE(red.matrix.rows() == 8);
    CHECK(max_abs(Matrix(red.matrix - avg)) < 1e-12);
  }
}
