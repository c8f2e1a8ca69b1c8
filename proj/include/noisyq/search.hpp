#pragma once

// Noisy Grover search: classical checking, truncated Grover runs, parallel
// repetition and the unknown-rate doubling schedule.

#include <cstdint>
#include <optional>
#include <vector>

#include "noisyq/oracles.hpp"
#include "noisyq/runtime.hpp"

namespace noisyq {

struct GroverFormula {
  double value = 0.0;
  // False when k = 0: there is nothing to find and the value is reported as 0.
  bool defined = true;
};

// sin²((2t+1)·arcsin√(k/n)).
GroverFormula grover_success_formula(std::size_t n, std::size_t k, std::size_t t);

// Black-box access to a noisy oracle with its own call counter. The search
// routines ignore error flags, so calls are always simulated in concealing
// form.
class OracleAccess {
 public:
  OracleAccess(const TruthTable& f, NoiseSpec spec);

  std::size_t n() const { return f_.n(); }
  std::size_t marked_value() const { return f_.marked_value(); }
  const NoiseSpec& spec() const { return spec_; }
  std::size_t calls() const { return calls_; }

  void query(PureState& psi, Rng& rng);
  // Ground truth, only for logging and tests.
  bool is_marked(std::size_t x) const { return f_.is_marked(x); }

 private:
  const TruthTable& f_;
  NoiseSpec spec_;
  std::size_t calls_ = 0;
};

struct CheckPolicy {
  std::size_t k_check = 1;
  // Verdict is "marked" when more than this many repetitions read the marked value.
  std::size_t threshold = 0;

  static CheckPolicy for_spec(const NoiseSpec& spec, std::size_t n);
};

struct CheckResult {
  bool verdict = false;
  std::size_t queries_used = 0;
};

CheckResult check_element(std::size_t x, OracleAccess& access, const CheckPolicy& policy, Rng& rng);

struct GroverSample {
  std::size_t x = 0;
  std::size_t queries_used = 0;
};

// t noisy calls interleaved with diffusion on Qi, then a sample of Qi.
GroverSample grover_run(std::size_t t, OracleAccess& access, Rng& rng);

struct CandidateRecord {
  std::size_t iterations = 0;
  std::size_t candidate = 0;
  bool verdict = false;
  // Oracle calls spent on this Grover run and its check.
  std::size_t queries = 0;
};

struct SearchOutcome {
  std::optional<std::size_t> found;
  std::size_t queries_used = 0;
  std::vector<CandidateRecord> log;

  void absorb(const SearchOutcome& other);
};

// Iteration counts 1, 2, 4, ... below ⌈1/p_guess⌉, then ⌈1/p_guess⌉ itself.
std::vector<std::size_t> truncated_schedule(double p_guess);

SearchOutcome truncated_grover(OracleAccess& access, double p_guess, const CheckPolicy& policy, Rng& rng);

// ⌈4·ln(2/ε)⌉.
std::size_t repetition_constant(double epsilon);
// max(1, ⌈c_ε·n·p²⌉).
std::size_t repetition_count(std::size_t n, double p, double epsilon);

// Known rate: repetitions of truncated_grover at max(p, 1/√n), stopping at the
// first confirmed candidate. Unknown rate (p_known empty): one full Grover run
// plus a check, then rate guesses 1/√n, 2/√n, ... capped at 1.
SearchOutcome noisy_search(OracleAccess& access, std::optional<double> p_known, double epsilon, Rng& rng);
SearchOutcome noisy_search(const TruthTable& f, const NoiseSpec& spec, std::optional<double> p_known,
                           double epsilon, std::uint64_t seed);

struct SearchTrial {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::size_t marked = 0;
  SearchOutcome outcome;
  bool correct() const { return outcome.found && *outcome.found == marked; }
};

// Independent trials with a uniformly placed marked element; per-trial seeds
// come from derive_seed(base_seed, n, i), so results do not depend on
// `threads`.
std::vector<SearchTrial> search_trials(std::size_t n, const NoiseSpec& spec, std::optional<double> p_known,
                                       double epsilon, std::size_t trials, std::uint64_t base_seed,
                                       std::size_t threads = 1);

}  // namespace noisyq
