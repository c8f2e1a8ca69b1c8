// End-to-end acceptance run: one PASS/FAIL line per criterion, non-zero exit
// if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>

#include "noisyq/lowerbound.hpp"
#include "noisyq/report.hpp"
#include "noisyq/search.hpp"

#ifndef NQS_BINARY
#error "NQS_BINARY must name the CLI executable"
#endif

using namespace noisyq;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail.clear();
    pass = false;
    if (detail.size() < 400) detail += (detail.empty() ? "" : "; ") + why;
  }
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::size_t threads() { return std::max(1u, std::thread::hardware_concurrency()); }

const CheckRow* find(const std::vector<CheckRow>& rows, const std::string& name) {
  for (const auto& r : rows)
    if (r.name == name) return &r;
  return nullptr;
}

std::string where(std::size_t n, std::size_t t) { return "n=" + std::to_string(n) + " t=" + std::to_string(t); }

// Criterion 1
Verdict claim53() {
  Verdict v;
  double worst = 0;
  for (std::size_t n = 3; n <= 6; ++n)
    for (std::size_t t = 0; t <= 2; ++t) {
      const auto rows = verify_claim_norms(t, n, 2, Mode::WorstCase);
      const auto* r = find(rows, "claim5.3.norm");
      const double expected = 2.0 * std::sqrt(double(n - t - 1)) / double(n - t);
      if (!r) {
        v.fail("missing norm row at " + where(n, t));
        continue;
      }
      const double err = std::abs(r->computed - expected);
      worst = std::max(worst, err);
      if (err > 1e-9) v.fail(where(n, t) + ": computed " + num(r->computed) + ", closed form " + num(expected));
    }
  if (v.pass) v.detail = "12 grid points, max deviation " + num(worst);
  return v;
}

// Criterion 2
Verdict claim54() {
  Verdict v;
  for (std::size_t n = 3; n <= 6; ++n)
    for (std::size_t t = 0; t <= 2; ++t) {
      const auto norms = verify_claim_norms(t, n, 2, Mode::WorstCase);
      const auto ids = verify_claim_identities(t, n, 2, Mode::WorstCase);
      const auto* sq = find(norms, "claim5.4.norm_squared");
      const auto* zero = find(ids, "claim5.4.B_OC_A_zero");
      if (!sq || !zero) {
        v.fail("missing rows at " + where(n, t));
        continue;
      }
      const double expected = 1.0 / double(n - t);
      if (std::abs(sq->computed - expected) > 1e-9)
        v.fail(where(n, t) + ": squared norm " + num(sq->computed) + " vs " + num(expected));
      if (zero->computed > 1e-10) v.fail(where(n, t) + ": B O_C A norm " + num(zero->computed));
    }
  if (v.pass) v.detail = "squared norms equal 1/(n-t), B-leakage below 1e-10 on 12 grid points";
  return v;
}

// Criterion 3
Verdict exact_identities() {
  Verdict v;
  std::size_t count = 0;
  double worst = 0;
  for (std::size_t n = 3; n <= 6; ++n)
    for (std::size_t t = 0; t <= 2; ++t)
      for (const auto& r : verify_claim_identities(t, n, 2, Mode::WorstCase)) {
        const bool relevant = r.name.rfind("claim5.1", 0) == 0 || r.name.rfind("claim5.2", 0) == 0 ||
                              r.name.rfind("claimOQonAct", 0) == 0;
        if (!relevant) {
          if (r.asserted && !r.pass) v.fail(where(n, t) + " " + r.name + " residual " + num(r.residual));
          continue;
        }
        ++count;
        worst = std::max(worst, r.residual);
        if (r.residual > 1e-10) v.fail(where(n, t) + " " + r.name + " residual " + num(r.residual));
      }
  if (count == 0) v.fail("no identity rows produced");
  if (v.pass) v.detail = std::to_string(count) + " identity residuals, max " + num(worst);
  return v;
}

// Criterion 4
Verdict appendix() {
  Verdict v;
  for (std::size_t n : {2, 3})
    for (std::size_t m : {2, 4})
      for (std::size_t t : {0, 1}) {
        const auto norms = verify_claim_norms(t, n, m, Mode::RandomFunction);
        const auto ids = verify_claim_identities(t, n, m, Mode::RandomFunction);
        const std::string at = "n=" + std::to_string(n) + " m=" + std::to_string(m) + " t=" + std::to_string(t);
        const auto* a3 = find(norms, "claimA.3.norm");
        const auto* a4 = find(norms, "claimA.4.norm");
        const double md = double(m);
        if (!a3 || std::abs(a3->computed - std::sqrt(2 * md - 3) / (md - 1)) > 1e-9)
          v.fail(at + ": A.3 norm " + (a3 ? num(a3->computed) : "missing"));
        if (!a4 || std::abs(a4->computed - 1.0 / std::sqrt(md)) > 1e-9)
          v.fail(at + ": A.4 value " + (a4 ? num(a4->computed) : "missing"));
        for (const auto& r : ids)
          if ((r.name.rfind("claimA.2", 0) == 0 && r.residual > 1e-10) || (r.asserted && !r.pass))
            v.fail(at + " " + r.name + " residual " + num(r.residual));
      }
  std::size_t runs = 0, violations = 0;
  for (std::size_t n : {2, 3})
    for (std::size_t m : {2, 4})
      for (double p : {0.25, 0.75})
        for (std::size_t k = 0; k < 50; ++k) {
          const auto alg = random_algorithm(n, m, 2, 1, k % 2 == 0, derive_seed(4, n * 16 + m, k));
          for (const auto& r : verify_lemma_inequalities(alg, p, Mode::RandomFunction))
            if (r.asserted && !r.pass) {
              ++violations;
              v.fail("lemma " + r.name + " n=" + std::to_string(n) + " m=" + std::to_string(m) + " p=" + num(p));
            }
          ++runs;
        }
  if (v.pass) v.detail = "norms and containments on 8 grid points; " + std::to_string(runs) + " algorithms, 0 violations";
  return v;
}

// Criterion 5
Verdict lemma61() {
  Verdict v;
  std::size_t runs = 0;
  double loosest = 0;
  for (double p : {0.2, 0.5, 0.8})
    for (std::size_t k = 0; k < 200; ++k) {
      const auto alg = random_algorithm(5, 2, 3, 1, k % 2 == 0, derive_seed(5, std::size_t(p * 10), k));
      const auto rows = verify_lemma_inequalities(alg, p, Mode::WorstCase);
      ++runs;
      for (const auto& r : rows) {
        if (r.name == "psi_0" && std::abs(r.computed) > 1e-10) v.fail("Psi_0 = " + num(r.computed));
        if (r.name == "final_success_bound" && r.computed > r.expected + 1e-9)
          v.fail("q_succ " + num(r.computed) + " above " + num(r.expected));
        if (r.name == "increment_bound") loosest = std::max(loosest, r.computed / r.expected);
        if (r.asserted && !r.pass) v.fail(r.name + " at p=" + num(p) + " algorithm " + std::to_string(k));
      }
    }
  if (v.pass)
    v.detail = std::to_string(runs) + " algorithms, 0 violations; largest increment/bound ratio " + num(loosest);
  return v;
}

// Criterion 6
Verdict purification() {
  Verdict v;
  double worst = 0;
  for (double p : {0.0, 0.5})
    for (std::size_t k = 0; k < 20; ++k) {
      const auto alg = random_algorithm(4, 2, 3, k % 3, true, derive_seed(6, std::size_t(p * 10), k));
      const auto er = run_extended(alg, p, Mode::WorstCase);
      const std::vector<std::string> drop{kF, record_register(1), record_register(2), record_register(3)};
      const auto red = reduced_density(er.final_state, drop);
      Matrix avg = Matrix::Zero(red.matrix.rows(), red.matrix.cols());
      for (std::size_t x = 0; x < 4; ++x)
        avg += run_exact(alg, TruthTable::unique_marked(4, x), NoiseSpec(NoiseKind::Dephasing, p, true)).final_state.matrix;
      avg /= 4.0;
      if (red.layout.total_dim() != std::size_t(avg.rows())) {
        v.fail("layout mismatch");
        continue;
      }
      const double d = max_abs(Matrix(red.matrix - avg));
      worst = std::max(worst, d);
      if (d > 1e-9) v.fail("p=" + num(p) + " algorithm " + std::to_string(k) + ": deviation " + num(d));
    }
  if (v.pass) v.detail = "40 algorithms, max entry deviation " + num(worst);
  return v;
}

// Criterion 7
Verdict grover() {
  Verdict v;
  double worst = 0;
  for (std::size_t n : {4, 16}) {
    const auto top = static_cast<std::size_t>(std::floor(std::numbers::pi / 4 * std::sqrt(double(n))));
    for (std::size_t t = 0; t <= top; ++t) {
      const double s = average_success(grover_algorithm(n, t), InstanceFamily::unique_marked(), NoiseSpec());
      const double f = grover_success_formula(n, 1, t).value;
      worst = std::max(worst, std::abs(s - f));
      if (std::abs(s - f) > 1e-9) v.fail(where(n, t) + ": " + num(s) + " vs " + num(f));
    }
  }
  if (v.pass) v.detail = "max deviation " + num(worst);
  return v;
}

// Criterion 8
Verdict checking() {
  Verdict v;
  const std::size_t n = 64, trials = 10000;
  {
    const auto f = TruthTable::unique_marked(n, 41);
    OracleAccess access(f, NoiseSpec(NoiseKind::Dephasing, 0.9));
    const auto pol = CheckPolicy::for_spec(access.spec(), n);
    Rng rng(derive_seed(8, 0, 0));
    std::size_t wrong = 0, extra = 0;
    for (std::size_t i = 0; i < trials; ++i) {
      const std::size_t x = i % 2 == 0 ? 41 : rng() % n;
      const auto c = check_element(x, access, pol, rng);
      wrong += c.verdict != (x == 41);
      extra += c.queries_used != 1;
    }
    if (wrong || extra)
      v.fail("dephasing: " + std::to_string(wrong) + " wrong verdicts, " + std::to_string(extra) + " multi-query checks");
  }
  std::size_t errors = 0, k = 0;
  {
    const auto f = TruthTable::unique_marked(n, 7);
    OracleAccess access(f, NoiseSpec(NoiseKind::Depolarizing, 0.5));
    const auto pol = CheckPolicy::for_spec(access.spec(), n);
    k = pol.k_check;
    Rng rng(derive_seed(8, 1, 0));
    for (std::size_t i = 0; i < trials; ++i) {
      const std::size_t x = i % 2 == 0 ? 7 : rng() % n;
      errors += check_element(x, access, pol, rng).verdict != (x == 7);
    }
    const double freq = double(errors) / double(trials);
    if (freq > 2.0 / double(n * n)) v.fail("depolarizing error frequency " + num(freq));
  }
  if (v.pass)
    v.detail = "dephasing 0 errors with 1 query each; depolarizing k=" + std::to_string(k) + ", " +
               std::to_string(errors) + " errors in " + std::to_string(trials);
  return v;
}

// Criterion 9
Verdict scaling() {
  Verdict v;
  const double p = 0.25;
  std::vector<double> ratios;
  std::string summary;
  for (std::size_t n : {256, 1024, 4096}) {
    const auto trs = search_trials(n, NoiseSpec(NoiseKind::Dephasing, p), p, 0.1, 200, 9, threads());
    double q = 0, ok = 0;
    for (const auto& t : trs) {
      q += double(t.outcome.queries_used);
      ok += t.correct();
    }
    const double rate = ok / 200, mean = q / 200, ratio = mean / (double(n) * p);
    ratios.push_back(ratio);
    summary += (summary.empty() ? "" : ", ") + std::string("n=") + std::to_string(n) + " success " + num(rate) +
               " q/np " + num(ratio);
    if (rate < 0.9) v.fail("n=" + std::to_string(n) + " success " + num(rate));
  }
  const double lo = *std::min_element(ratios.begin(), ratios.end());
  const double hi = *std::max_element(ratios.begin(), ratios.end());
  if (hi > 2 * lo) v.fail("queries/(np) spans " + num(lo) + " to " + num(hi));
  if (v.pass) v.detail = summary;
  return v;
}

// Criterion 10
Verdict channel_algebra() {
  Verdict v;
  const std::size_t n = 4;
  const RegisterLayout in({{kQi, n}, {kQo, 2}, {kW, 1}});
  const std::vector<std::string> q{kQi, kQo, kW};
  double worst = 0;
  for (double p : {0.0, 0.3, 1.0}) {
    const auto dep = signaling_noise_channel(NoiseSpec(NoiseKind::Depolarizing, p, true), n, 2, 1);
    const auto phase = signaling_noise_channel(NoiseSpec(NoiseKind::Dephasing, p, true), n, 2, 1);
    const auto fix = flag_conditioned_depolarizer(n, 2, 2);
    const Matrix a = choi_matrix([&](const DensityState& r) { return apply_channel(r, dep, q); }, in);
    const Matrix b = choi_matrix([&](const DensityState& r) { return apply_channel(apply_channel(r, phase, q), fix, q); }, in);
    const double d = a.rows() == b.rows() ? max_abs(Matrix(a - b)) : 1.0;
    worst = std::max(worst, d);
    if (d > 1e-12) v.fail("p=" + num(p) + ": Choi deviation " + num(d));

    // The traced extended call realises the signaling dephasing oracle call.
    const RegisterLayout qin({{kQi, n}, {kQo, 2}});
    for (std::size_t z = 0; z < n; ++z) {
      const auto f = TruthTable::unique_marked(n, z);
      const Matrix c1 = choi_matrix([&](const DensityState& r) { return extended_call_traced(n, z, p, r); }, qin);
      const Matrix c2 = choi_matrix(
          [&](const DensityState& r) { return signaling_noisy_oracle_call(r, f, NoiseSpec(NoiseKind::Dephasing, p, true)); }, qin);
      const double e = c1.rows() == c2.rows() ? max_abs(Matrix(c1 - c2)) : 1.0;
      worst = std::max(worst, e);
      if (e > 1e-12) v.fail("extended call z=" + std::to_string(z) + " p=" + num(p) + ": " + num(e));
    }
  }
  if (v.pass) v.detail = "max Choi deviation " + num(worst);
  return v;
}

// Criterion 11
std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

Verdict determinism() {
  Verdict v;
  const auto dir = std::filesystem::temp_directory_path() / "noisyq_acceptance";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const std::vector<std::pair<std::string, std::string>> runs{
      {"simulate", "simulate --n 4 --tau 2 --kind depolarizing --p 0.1,0.4 --method trajectory --trials 300 --seed 5"},
      {"simulate_exact", "simulate --n 8 --tau 2 --kind dephasing --p 0.3 --seed 5"},
      {"search", "search --n 64,128 --kind depolarizing --p 0.2 --trials 20 --seed 6"},
      {"search_unknown", "search --n 64 --kind dephasing --p unknown --true-p 0.3 --trials 20 --seed 6"},
      {"verify", "verify-claims --mode worst --n 4 --t 0,1 --lemma-algorithms 2 --p 0.5 --seed 7"},
      {"verify_random", "verify-claims --mode random --n 2 --m 2,4 --t 1 --lemma-algorithms 1 --p 0.5 --seed 7"},
      {"trace", "progress-trace --n 5 --tau 2 --random-algorithm 3 --ell 1 --signaling --p 0.4 --seed 8"},
      {"scaling", "scaling --n 64,128 --p 0.25,0.5 --trials 10 --seed 9"},
  };
  std::size_t files = 0;
  for (const auto& [name, args] : runs) {
    std::string outputs[2], plots[2];
    for (int k = 0; k < 2; ++k) {
      const auto csv = dir / (name + std::to_string(k) + ".csv");
      const auto svg = dir / (name + std::to_string(k) + ".svg");
      const std::string cmd = std::string(NQS_BINARY) + " " + args + " --threads " + std::to_string(k + 1) + " --out " +
                              csv.string() + (name == "scaling" ? " --plot " + svg.string() : "") + " > /dev/null 2>&1";
      const int rc = std::system(cmd.c_str());
      if (rc != 0) v.fail(name + " exited with status " + std::to_string(rc));
      outputs[k] = slurp(csv);
      if (name == "scaling") plots[k] = slurp(svg);
    }
    if (outputs[0].empty()) v.fail(name + " wrote nothing");
    if (outputs[0] != outputs[1]) v.fail(name + " CSV differs between runs");
    if (plots[0] != plots[1]) v.fail(name + " SVG differs between runs");
    files += name == "scaling" ? 2 : 1;
  }
  if (v.pass) v.detail = std::to_string(runs.size()) + " experiments rerun with different thread counts, " +
                         std::to_string(files) + " outputs byte-identical";
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"worst-case active-leakage norm", claim53},
      {"worst-case classical-branch norms", claim54},
      {"worst-case exact identities", exact_identities},
      {"random-function norms, containments and inequalities", appendix},
      {"worst-case per-step inequalities", lemma61},
      {"purification consistency", purification},
      {"Grover closed form", grover},
      {"checking subroutine", checking},
      {"upper-bound scaling", scaling},
      {"channel algebra", channel_algebra},
      {"CLI determinism", determinism},
  };
  std::size_t failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !v.pass;
    std::printf("%s criterion %zu (%s): %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%zu of %zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
