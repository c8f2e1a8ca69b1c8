#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "noisyq/lowerbound.hpp"
#include "noisyq/report.hpp"
#include "noisyq/search.hpp"

namespace py = pybind11;
using namespace noisyq;

namespace {

py::list rows_to_list(const std::vector<CheckRow>& rows) {
  py::list out;
  for (const auto& r : rows) {
    py::dict d;
    d["mode"] = to_string(r.mode);
    d["n"] = r.n;
    d["m"] = r.m;
    d["t"] = r.t;
    d["p"] = r.p ? py::object(py::float_(*r.p)) : py::object(py::none());
    d["name"] = r.name;
    d["computed"] = r.computed;
    d["expected"] = r.expected;
    d["residual"] = r.residual;
    d["passed"] = r.pass;
    d["asserted"] = r.asserted;
    out.append(d);
  }
  return out;
}

py::dict outcome_to_dict(const SearchOutcome& o) {
  py::dict d;
  d["found"] = o.found ? py::object(py::int_(*o.found)) : py::object(py::none());
  d["queries"] = o.queries_used;
  py::list log;
  for (const auto& c : o.log) log.append(py::make_tuple(c.iterations, c.candidate, c.verdict, c.queries));
  d["log"] = log;
  return d;
}

Subspace parse_subspace(const std::string& s) {
  if (s == "A") return Subspace::A;
  if (s == "B") return Subspace::B;
  if (s == "C") return Subspace::C;
  if (s == "B_act") return Subspace::BAct;
  if (s == "B_pas") return Subspace::BPas;
  if (s == "succ") return Subspace::Succ;
  throw py::value_error("subspace must be one of A, B, C, B_act, B_pas, succ");
}

}  // namespace

PYBIND11_MODULE(_noisyq, m) {
  m.doc() = "Noisy-query search simulation and lower-bound verification";

  py::register_exception<CapExceededError>(m, "CapExceededError", PyExc_MemoryError);
  py::register_exception<Error>(m, "Error", PyExc_ValueError);

  py::enum_<Mode>(m, "Mode").value("WORST_CASE", Mode::WorstCase).value("RANDOM_FUNCTION", Mode::RandomFunction);
  py::enum_<NoiseKind>(m, "NoiseKind")
      .value("NONE", NoiseKind::None)
      .value("DEPOLARIZING", NoiseKind::Depolarizing)
      .value("DEPHASING", NoiseKind::Dephasing);

  py::class_<NoiseSpec>(m, "NoiseSpec")
      .def(py::init<NoiseKind, double, bool>(), py::arg("kind") = NoiseKind::None, py::arg("p") = 0.0,
           py::arg("signaling") = false)
      .def_readonly("kind", &NoiseSpec::kind)
      .def_readonly("p", &NoiseSpec::p)
      .def_readonly("signaling", &NoiseSpec::signaling)
      .def("__repr__", [](const NoiseSpec& s) {
        return "NoiseSpec(" + to_string(s.kind) + ", p=" + format_number(s.p) + (s.signaling ? ", signaling" : "") + ")";
      });

  py::class_<TruthTable>(m, "TruthTable")
      .def(py::init<std::size_t, std::size_t, std::vector<std::size_t>, std::size_t>(), py::arg("n"), py::arg("m"),
           py::arg("outputs"), py::arg("marked_value"))
      .def_static("unique_marked", &TruthTable::unique_marked, py::arg("n"), py::arg("x"))
      .def_static("uniform_random", &TruthTable::uniform_random, py::arg("n"), py::arg("m"), py::arg("seed"))
      .def_property_readonly("n", &TruthTable::n)
      .def_property_readonly("m", &TruthTable::m)
      .def_property_readonly("outputs", &TruthTable::outputs)
      .def_property_readonly("marked_value", &TruthTable::marked_value)
      .def("marked_inputs", &TruthTable::marked_inputs)
      .def("__call__", [](const TruthTable& f, std::size_t x) {
        if (x >= f.n()) throw py::index_error("input out of range");
        return f(x);
      });

  m.def("derive_seed", &derive_seed, py::arg("base"), py::arg("stream"), py::arg("index"));

  m.def(
      "grover_success_formula",
      [](std::size_t n, std::size_t k, std::size_t t) { return grover_success_formula(n, k, t).value; },
      py::arg("n"), py::arg("k"), py::arg("t"));

  m.def(
      "grover_success",
      [](std::size_t n, std::size_t tau, const NoiseSpec& spec, std::optional<std::size_t> marked) {
        py::gil_scoped_release release;
        const auto alg = grover_algorithm(n, tau, spec.signaling);
        if (marked) return run_exact(alg, TruthTable::unique_marked(n, *marked), spec).result.success_probability;
        return average_success(alg, InstanceFamily::unique_marked(), spec);
      },
      py::arg("n"), py::arg("tau"), py::arg("spec") = NoiseSpec(), py::arg("marked") = py::none(),
      "Exact success probability of Grover's algorithm, averaged over the marked element unless one is given.");

  m.def(
      "random_algorithm_success",
      [](std::size_t n, std::size_t m_, std::size_t tau, std::size_t ell, const NoiseSpec& spec, std::uint64_t seed,
         std::size_t samples) {
        py::gil_scoped_release release;
        const auto alg = random_algorithm(n, m_, tau, ell, spec.signaling, seed);
        if (m_ == 2) return average_success(alg, InstanceFamily::unique_marked(), spec);
        return average_success(alg, InstanceFamily::uniform_random(samples, seed), spec);
      },
      py::arg("n"), py::arg("m"), py::arg("tau"), py::arg("ell"), py::arg("spec"), py::arg("seed"),
      py::arg("samples") = 0);

  m.def(
      "trajectory_success",
      [](std::size_t n, std::size_t tau, const NoiseSpec& spec, std::size_t marked, std::size_t trials,
         std::uint64_t seed) {
        py::gil_scoped_release release;
        const auto alg = grover_algorithm(n, tau, spec.signaling);
        const auto f = TruthTable::unique_marked(n, marked);
        std::size_t hits = 0;
        for (std::size_t i = 0; i < trials; ++i) hits += run_trajectory(alg, f, spec, derive_seed(seed, marked, i)).success;
        return trials ? double(hits) / double(trials) : 0.0;
      },
      py::arg("n"), py::arg("tau"), py::arg("spec"), py::arg("marked"), py::arg("trials"), py::arg("seed"));

  m.def(
      "noisy_search",
      [](const TruthTable& f, const NoiseSpec& spec, std::optional<double> p, double eps, std::uint64_t seed) {
        SearchOutcome o;
        {
          py::gil_scoped_release release;
          o = noisy_search(f, spec, p, eps, seed);
        }
        return outcome_to_dict(o);
      },
      py::arg("f"), py::arg("spec"), py::arg("p"), py::arg("eps"), py::arg("seed"),
      "Search for a marked element. Pass p=None for the unknown-rate schedule.");

  m.def(
      "search_trials",
      [](std::size_t n, const NoiseSpec& spec, std::optional<double> p, double eps, std::size_t trials,
         std::uint64_t seed, std::size_t threads) {
        std::vector<SearchTrial> res;
        {
          py::gil_scoped_release release;
          res = search_trials(n, spec, p, eps, trials, seed, threads);
        }
        py::list out;
        for (const auto& t : res) {
          auto d = outcome_to_dict(t.outcome);
          d["index"] = t.index;
          d["seed"] = t.seed;
          d["marked"] = t.marked;
          d["correct"] = t.correct();
          out.append(d);
        }
        return out;
      },
      py::arg("n"), py::arg("spec"), py::arg("p"), py::arg("eps"), py::arg("trials"), py::arg("seed"),
      py::arg("threads") = 1);

  m.def(
      "check_policy",
      [](const NoiseSpec& spec, std::size_t n) {
        const auto pol = CheckPolicy::for_spec(spec, n);
        return py::make_tuple(pol.k_check, pol.threshold);
      },
      py::arg("spec"), py::arg("n"), "(repetitions, threshold) of the checking subroutine.");

  m.def("truncated_schedule", &truncated_schedule, py::arg("p_guess"));

  m.def(
      "verify_claim_identities",
      [](std::size_t t, std::size_t n, std::size_t m_, Mode mode) {
        std::vector<CheckRow> rows;
        {
          py::gil_scoped_release release;
          rows = verify_claim_identities(t, n, m_, mode);
        }
        return rows_to_list(rows);
      },
      py::arg("t"), py::arg("n"), py::arg("m") = 2, py::arg("mode") = Mode::WorstCase);

  m.def(
      "verify_claim_norms",
      [](std::size_t t, std::size_t n, std::size_t m_, Mode mode) {
        std::vector<CheckRow> rows;
        {
          py::gil_scoped_release release;
          rows = verify_claim_norms(t, n, m_, mode);
        }
        return rows_to_list(rows);
      },
      py::arg("t"), py::arg("n"), py::arg("m") = 2, py::arg("mode") = Mode::WorstCase);

  m.def(
      "verify_lemma_inequalities",
      [](std::size_t n, std::size_t m_, std::size_t tau, std::size_t ell, bool signaling, std::uint64_t seed, double p,
         Mode mode) {
        std::vector<CheckRow> rows;
        {
          py::gil_scoped_release release;
          rows = verify_lemma_inequalities(random_algorithm(n, m_, tau, ell, signaling, seed), p, mode);
        }
        return rows_to_list(rows);
      },
      py::arg("n"), py::arg("m"), py::arg("tau"), py::arg("ell"), py::arg("signaling"), py::arg("seed"), py::arg("p"),
      py::arg("mode") = Mode::WorstCase, "Per-step inequalities for one seeded random algorithm.");

  m.def(
      "progress_trace",
      [](std::size_t n, std::size_t tau, double p, std::optional<std::uint64_t> random_seed, std::size_t m_,
         std::size_t ell, Mode mode) {
        ExtendedRun run;
        {
          py::gil_scoped_release release;
          const auto alg = random_seed ? random_algorithm(n, m_, tau, ell, true, *random_seed) : grover_algorithm(n, tau);
          run = run_extended(alg, p, mode);
        }
        py::list steps;
        for (const auto& s : run.trace.steps) {
          py::dict d;
          d["t"] = s.t;
          d["c"] = s.c;
          d["a"] = s.a;
          d["b"] = s.b;
          d["b_act"] = s.b_act;
          d["b_pas"] = s.b_pas;
          d["psi"] = s.psi;
          steps.append(d);
        }
        py::dict out;
        out["steps"] = steps;
        out["q_succ"] = run.trace.q_succ;
        out["final_bound"] = run.trace.final_bound;
        return out;
      },
      py::arg("n"), py::arg("tau"), py::arg("p"), py::arg("random_seed") = py::none(), py::arg("m") = 2,
      py::arg("ell") = 0, py::arg("mode") = Mode::WorstCase,
      "Progress measure per step for Grover (default) or a seeded random signaling algorithm.");

  m.def(
      "projector",
      [](Mode mode, std::size_t n, std::size_t m_, const std::string& subspace, std::size_t t) -> Matrix {
        return ProjectorFamily(mode, n, m_).materialize(parse_subspace(subspace), t);
      },
      py::arg("mode"), py::arg("n"), py::arg("m"), py::arg("subspace"), py::arg("t"),
      "Dense projector on F x R^t (A, B, C) or F x Qi x R^t (B_act, B_pas, succ).");

  m.def(
      "choi_signaling",
      [](NoiseKind kind, double p, std::size_t n, bool depolarize_on_flag) -> Matrix {
        const RegisterLayout in({{kQi, n}, {kQo, 2}, {kW, 1}});
        const std::vector<std::string> q{kQi, kQo, kW};
        const auto ch = signaling_noise_channel(NoiseSpec(kind, p, true), n, 2, 1);
        if (!depolarize_on_flag) return choi_matrix([&](const DensityState& r) { return apply_channel(r, ch, q); }, in);
        const auto fix = flag_conditioned_depolarizer(n, 2, 2);
        return choi_matrix([&](const DensityState& r) { return apply_channel(apply_channel(r, ch, q), fix, q); }, in);
      },
      py::arg("kind"), py::arg("p"), py::arg("n"), py::arg("depolarize_on_flag") = false,
      "Choi matrix of the error-signaling noise channel on Qi x Qo x W, optionally followed by "
      "depolarization conditioned on the flag.");
}
