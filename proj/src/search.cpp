#include "noisyq/search.hpp"

#include <cmath>
#include <atomic>
#include <numbers>
#include <thread>

#include "noisyq/report.hpp"

namespace noisyq {

GroverFormula grover_success_formula(std::size_t n, std::size_t k, std::size_t t) {
  if (n == 0 || k > n) throw Error("grover_success_formula needs 0 <= k <= n and n >= 1");
  if (k == 0) return {0.0, false};
  const double theta = std::asin(std::sqrt(static_cast<double>(k) / static_cast<double>(n)));
  const double s = std::sin(static_cast<double>(2 * t + 1) * theta);
  return {s * s, true};
}

OracleAccess::OracleAccess(const TruthTable& f, NoiseSpec spec) : f_(f), spec_(spec) {
  if (f.m() != 2) throw DimensionError("search expects a Boolean oracle (m = 2)");
  spec_.signaling = false;
}

void OracleAccess::query(PureState& psi, Rng& rng) {
  noisy_oracle_trajectory(psi, f_, spec_, rng);
  ++calls_;
}

CheckPolicy CheckPolicy::for_spec(const NoiseSpec& spec, std::size_t n) {
  if (spec.kind != NoiseKind::Depolarizing || spec.effective_p() == 0.0) return {1, 0};
  const double r = 1.0 - spec.p;
  if (r <= 0.0) throw Error("checking is impossible under complete depolarization (p = 1)");
  const double logn = std::log(static_cast<double>(std::max<std::size_t>(n, 2)));
  const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(48.0 * logn / (r * r))));
  return {k, k / 2};
}

CheckResult check_element(std::size_t x, OracleAccess& access, const CheckPolicy& policy, Rng& rng) {
  const RegisterLayout layout({{kQi, access.n()}, {kQo, 2}, {kW, 1}});
  std::size_t hits = 0;
  for (std::size_t i = 0; i < policy.k_check; ++i) {
    PureState psi = PureState::basis(layout, x * 2);
    access.query(psi, rng);
    if (measure_sample(psi, kQo, rng).outcome == access.marked_value()) ++hits;
  }
  return {hits > policy.threshold, policy.k_check};
}

GroverSample grover_run(std::size_t t, OracleAccess& access, Rng& rng) {
  const auto alg = grover_algorithm(access.n(), t);
  const QueryFn q = [&](PureState& psi, Rng& g) { access.query(psi, g); };
  const auto run = execute_trajectory(alg, q, [&](std::size_t x) { return access.is_marked(x); }, rng);
  return {*run.result.answer, run.result.queries_used};
}

void SearchOutcome::absorb(const SearchOutcome& other) {
  if (!found) found = other.found;
  queries_used += other.queries_used;
  log.insert(log.end(), other.log.begin(), other.log.end());
}

std::vector<std::size_t> truncated_schedule(double p_guess) {
  if (!(p_guess > 0.0) || p_guess > 1.0) throw Error("p_guess must lie in (0, 1]");
  const auto top = static_cast<std::size_t>(std::ceil(1.0 / p_guess - 1e-12));
  std::vector<std::size_t> s;
  for (std::size_t t = 1; t < top; t *= 2) s.push_back(t);
  s.push_back(top);
  return s;
}

namespace {

SearchOutcome run_and_check(std::size_t iterations, OracleAccess& access, const CheckPolicy& policy, Rng& rng) {
  SearchOutcome out;
  const auto g = grover_run(iterations, access, rng);
  const auto c = check_element(g.x, access, policy, rng);
  const auto q = g.queries_used + c.queries_used;
  out.log.push_back({iterations, g.x, c.verdict, q});
  out.queries_used = q;
  if (c.verdict) out.found = g.x;
  return out;
}

SearchOutcome repeated_search(OracleAccess& access, double p, double epsilon, const CheckPolicy& policy,
                              Rng& rng) {
  SearchOutcome out;
  const auto reps = repetition_count(access.n(), p, epsilon);
  for (std::size_t i = 0; i < reps && !out.found; ++i) out.absorb(truncated_grover(access, p, policy, rng));
  return out;
}

}  // namespace

SearchOutcome truncated_grover(OracleAccess& access, double p_guess, const CheckPolicy& policy, Rng& rng) {
  SearchOutcome out;
  for (auto t : truncated_schedule(p_guess)) {
    out.absorb(run_and_check(t, access, policy, rng));
    if (out.found) break;
  }
  return out;
}

std::size_t repetition_constant(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error("epsilon must lie in (0, 1)");
  return static_cast<std::size_t>(std::ceil(4.0 * std::log(2.0 / epsilon)));
}

std::size_t repetition_count(std::size_t n, double p, double epsilon) {
  const double c = static_cast<double>(repetition_constant(epsilon));
  const double reps = std::ceil(c * static_cast<double>(n) * p * p - 1e-9);
  return std::max<std::size_t>(1, static_cast<std::size_t>(reps));
}

SearchOutcome noisy_search(OracleAccess& access, std::optional<double> p_known, double epsilon, Rng& rng) {
  const auto n = access.n();
  const double floor_p = 1.0 / std::sqrt(static_cast<double>(n));
  const auto policy = CheckPolicy::for_spec(access.spec(), n);
  if (p_known) {
    const double p = access.spec().kind == NoiseKind::None ? floor_p : std::max(*p_known, floor_p);
    return repeated_search(access, std::min(p, 1.0), epsilon, policy, rng);
  }
  const auto full = static_cast<std::size_t>(std::floor(std::numbers::pi / 4.0 * std::sqrt(static_cast<double>(n))));
  SearchOutcome out = run_and_check(full, access, policy, rng);
  for (double guess = floor_p; !out.found; guess *= 2.0) {
    const double g = std::min(guess, 1.0);
    out.absorb(repeated_search(access, g, epsilon, policy, rng));
    if (g >= 1.0) break;
  }
  return out;
}

SearchOutcome noisy_search(const TruthTable& f, const NoiseSpec& spec, std::optional<double> p_known, double epsilon,
                           std::uint64_t seed) {
  OracleAccess access(f, spec);
  Rng rng(seed);
  return noisy_search(access, p_known, epsilon, rng);
}

std::vector<SearchTrial> search_trials(std::size_t n, const NoiseSpec& spec, std::optional<double> p_known,
                                       double epsilon, std::size_t trials, std::uint64_t base_seed,
                                       std::size_t threads) {
  std::vector<SearchTrial> out(trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < trials;) {
      auto& tr = out[i];
      tr.index = i;
      tr.seed = derive_seed(base_seed, n, i);
      tr.marked = static_cast<std::size_t>(derive_seed(tr.seed, 0, 0) % n);
      const auto f = TruthTable::unique_marked(n, tr.marked);
      tr.outcome = noisy_search(f, spec, p_known, epsilon, derive_seed(tr.seed, 1, 0));
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, trials));
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace noisyq
