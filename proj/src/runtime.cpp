#include "noisyq/runtime.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <unsupported/Eigen/KroneckerProduct>
#include <algorithm>

namespace noisyq {

namespace {

std::size_t pow_size(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) r *= base;
  return r;
}

Matrix gate_matrix(const Gate& g, const RegisterLayout& l) {
  switch (g.kind) {
    case Gate::Kind::Dense:
      return g.matrix;
    case Gate::Kind::Diffusion: {
      const auto d = static_cast<Eigen::Index>(l.dim(g.registers.at(0)));
      return Matrix::Constant(d, d, 2.0 / static_cast<double>(d)) - Matrix::Identity(d, d);
    }
    case Gate::Kind::Hadamard: {
      if (l.dim(g.registers.at(0)) != 2) throw DimensionError("Hadamard gate needs a dimension-2 register");
      Matrix h(2, 2);
      const double s = 1.0 / std::sqrt(2.0);
      h << s, s, s, -s;
      return h;
    }
    case Gate::Kind::Shift: {
      const auto d = static_cast<Eigen::Index>(l.dim(g.registers.at(0)));
      Matrix x = Matrix::Zero(d, d);
      for (Eigen::Index i = 0; i < d; ++i) x((i + 1) % d, i) = 1.0;
      return x;
    }
  }
  throw Error("unknown gate kind");
}

void apply_diffusion(PureState& psi, const std::string& reg) {
  const auto& l = psi.layout;
  const auto i = l.index_of(reg);
  const auto d = l[i].dim;
  const auto stride = l.stride(i);
  const auto block = stride * d;
  auto& a = psi.amplitudes;
  const double inv = 1.0 / static_cast<double>(d);
  for (std::size_t hi = 0; hi < l.total_dim(); hi += block)
    for (std::size_t lo = 0; lo < stride; ++lo) {
      cplx mean = 0.0;
      for (std::size_t v = 0; v < d; ++v) mean += a(static_cast<Eigen::Index>(hi + v * stride + lo));
      mean *= inv;
      for (std::size_t v = 0; v < d; ++v) {
        auto& z = a(static_cast<Eigen::Index>(hi + v * stride + lo));
        z = 2.0 * mean - z;
      }
    }
}

const std::vector<std::string>& algorithm_registers() {
  static const std::vector<std::string> regs{kQi, kQo, kW};
  return regs;
}

}  // namespace

// ---------------------------------------------------------------------------
// AlgorithmSpec

std::size_t AlgorithmSpec::workspace_dim(std::size_t queries_done) const {
  return pow_size(2, ell + (signaling ? queries_done : 0));
}

RegisterLayout AlgorithmSpec::layout_at(std::size_t queries_done) const {
  return RegisterLayout({{kQi, n}, {kQo, m}, {kW, workspace_dim(queries_done)}});
}

void AlgorithmSpec::validate() const {
  if (n == 0) throw DimensionError("algorithm needs n >= 1");
  const auto l0 = layout_at(0);
  if (static_cast<std::size_t>(initial.size()) != l0.total_dim())
    throw DimensionError("initial state has " + std::to_string(initial.size()) + " amplitudes, expected " +
                         std::to_string(l0.total_dim()));
  if (std::abs(initial.norm() - 1.0) > 1e-10) throw Error("initial state is not normalized");
  if (steps.size() != tau)
    throw DimensionError("algorithm lists " + std::to_string(steps.size()) + " unitaries for tau = " +
                         std::to_string(tau));
  for (std::size_t t = 1; t <= tau; ++t) {
    const auto l = layout_at(t);
    const auto& step = steps[t - 1];
    if (const auto* u = std::get_if<Matrix>(&step)) {
      if (static_cast<std::size_t>(u->rows()) != l.total_dim() || static_cast<std::size_t>(u->cols()) != l.total_dim())
        throw DimensionError("U_" + std::to_string(t) + " has dimension " + std::to_string(u->rows()) +
                             ", expected " + std::to_string(l.total_dim()));
      if (unitarity_residual(*u) > 1e-10) throw Error("U_" + std::to_string(t) + " is not unitary");
    } else {
      for (const auto& g : std::get<GateProgram>(step)) {
        if (g.registers.empty()) throw DimensionError("gate in step " + std::to_string(t) + " has no registers");
        std::size_t d = 1;
        for (const auto& r : g.registers) d *= l.dim(r);
        if (g.kind == Gate::Kind::Dense) {
          if (static_cast<std::size_t>(g.matrix.rows()) != d || static_cast<std::size_t>(g.matrix.cols()) != d)
            throw DimensionError("dense gate in step " + std::to_string(t) + " does not match its registers");
          if (unitarity_residual(g.matrix) > 1e-10)
            throw Error("dense gate in step " + std::to_string(t) + " is not unitary");
        } else if (g.registers.size() != 1) {
          throw DimensionError("structured gates act on exactly one register");
        }
      }
    }
  }
}

PureState apply_step(const PureState& psi, const Step& step) {
  if (const auto* u = std::get_if<Matrix>(&step)) return embed_and_apply(psi, *u, algorithm_registers());
  PureState out = psi;
  for (const auto& g : std::get<GateProgram>(step)) {
    if (g.kind == Gate::Kind::Diffusion) apply_diffusion(out, g.registers.at(0));
    else out = embed_and_apply(out, gate_matrix(g, out.layout), g.registers);
  }
  return out;
}

DensityState apply_step(const DensityState& rho, const Step& step) {
  if (const auto* u = std::get_if<Matrix>(&step)) return embed_and_apply(rho, *u, algorithm_registers());
  DensityState out = rho;
  for (const auto& g : std::get<GateProgram>(step)) out = embed_and_apply(out, gate_matrix(g, out.layout), g.registers);
  return out;
}

// ---------------------------------------------------------------------------
// Execution

namespace {

void check_compatible(const AlgorithmSpec& alg, const TruthTable& f, const NoiseSpec& spec) {
  if (f.n() != alg.n || f.m() != alg.m)
    throw DimensionError("oracle is for f:[" + std::to_string(f.n()) + "]→[" + std::to_string(f.m()) +
                         "] but the algorithm expects n=" + std::to_string(alg.n) + ", m=" + std::to_string(alg.m));
  if (spec.signaling != alg.signaling)
    throw DimensionError(alg.signaling ? "algorithm expects an error-signaling oracle"
                                       : "algorithm expects an error-concealing oracle");
}

double marked_mass(const std::vector<double>& dist, const TruthTable& f) {
  double s = 0.0;
  for (auto x : f.marked_inputs()) s += dist[x];
  return s;
}

}  // namespace

ExactRun run_exact(const AlgorithmSpec& alg, const TruthTable& f, const NoiseSpec& spec) {
  alg.validate();
  check_compatible(alg, f, spec);
  DensityState rho = DensityState::from_pure(PureState(alg.layout_at(0), alg.initial));
  for (std::size_t t = 1; t <= alg.tau; ++t) {
    rho = spec.signaling ? signaling_noisy_oracle_call(rho, f, spec) : noisy_oracle_call(rho, f, spec);
    try {
      rho = apply_step(rho, alg.steps[t - 1]);
    } catch (const DimensionError& e) {
      throw DimensionError("step " + std::to_string(t) + ": " + e.what());
    }
  }
  const double tr = rho.matrix.trace().real();
  if (std::abs(tr - 1.0) > 1e-9) throw Error("final trace drifted to " + std::to_string(tr));
  RunResult r;
  r.success_probability = marked_mass(measure_distribution(rho, kQi), f);
  r.queries_used = alg.tau;
  return {r, std::move(rho)};
}

TrajectoryRun execute_trajectory(const AlgorithmSpec& alg, const QueryFn& query,
                                 const std::function<bool(std::size_t)>& is_marked, Rng& rng,
                                 std::optional<std::size_t> stop_after) {
  PureState psi(alg.layout_at(0), alg.initial);
  std::size_t used = 0;
  for (std::size_t t = 1; t <= alg.tau; ++t) {
    if (stop_after && used >= *stop_after) break;
    query(psi, rng);
    ++used;
    psi = apply_step(psi, alg.steps[t - 1]);
  }
  const auto dist = measure_distribution(psi, kQi);
  std::discrete_distribution<std::size_t> pick(dist.begin(), dist.end());
  RunResult r;
  r.answer = pick(rng);
  r.success = is_marked(*r.answer);
  for (std::size_t x = 0; x < dist.size(); ++x)
    if (is_marked(x)) r.success_probability += dist[x];
  r.queries_used = used;
  return {r, std::move(psi)};
}

RunResult run_trajectory(const AlgorithmSpec& alg, const TruthTable& f, const NoiseSpec& spec, std::uint64_t seed) {
  alg.validate();
  check_compatible(alg, f, spec);
  Rng rng(seed);
  const QueryFn query = [&](PureState& psi, Rng& g) { noisy_oracle_trajectory(psi, f, spec, g); };
  return execute_trajectory(alg, query, [&](std::size_t x) { return f.is_marked(x); }, rng).result;
}

double average_success(const AlgorithmSpec& alg, const InstanceFamily& family, const NoiseSpec& spec) {
  if (family.kind == InstanceFamily::Kind::UniqueMarked) {
    if (alg.m != 2) throw DimensionError("the unique-marked family needs m = 2");
    double s = 0.0;
    for (std::size_t x = 0; x < alg.n; ++x)
      s += run_exact(alg, TruthTable::unique_marked(alg.n, x), spec).result.success_probability;
    return s / static_cast<double>(alg.n);
  }
  const double count = std::pow(static_cast<double>(alg.m), static_cast<double>(alg.n));
  if (count <= 4096.0) {
    const auto total = static_cast<std::size_t>(count);
    double s = 0.0;
    for (std::size_t code = 0; code < total; ++code) {
      std::vector<std::size_t> out(alg.n);
      auto c = code;
      for (std::size_t x = alg.n; x-- > 0;) {
        out[x] = c % alg.m;
        c /= alg.m;
      }
      s += run_exact(alg, TruthTable(alg.n, alg.m, std::move(out), 0), spec).result.success_probability;
    }
    return s / count;
  }
  if (family.samples == 0)
    throw Error("random-function family has m^n > 4096 instances; pass a sample count for seeded sampling");
  double s = 0.0;
  for (std::size_t i = 0; i < family.samples; ++i)
    s += run_exact(alg, TruthTable::uniform_random(alg.n, alg.m, family.seed + i), spec).result.success_probability;
  return s / static_cast<double>(family.samples);
}

// ---------------------------------------------------------------------------
// Builders

AlgorithmSpec grover_algorithm(std::size_t n, std::size_t tau, bool signaling) {
  AlgorithmSpec a;
  a.n = n;
  a.m = 2;
  a.tau = tau;
  a.ell = 0;
  a.signaling = signaling;
  a.initial = Vector(static_cast<Eigen::Index>(2 * n));
  const double amp = 1.0 / std::sqrt(2.0 * static_cast<double>(n));
  for (std::size_t x = 0; x < n; ++x) {
    a.initial(static_cast<Eigen::Index>(2 * x)) = amp;
    a.initial(static_cast<Eigen::Index>(2 * x + 1)) = -amp;
  }
  const GateProgram diffusion{Gate{Gate::Kind::Diffusion, {kQi}, {}}};
  a.steps.assign(tau, diffusion);
  return a;
}

AlgorithmSpec random_algorithm(std::size_t n, std::size_t m, std::size_t tau, std::size_t ell, bool signaling,
                               std::uint64_t seed) {
  Rng rng(seed);
  AlgorithmSpec a;
  a.n = n;
  a.m = m;
  a.tau = tau;
  a.ell = ell;
  a.signaling = signaling;
  a.initial = random_unit_vector(a.layout_at(0).total_dim(), rng);
  for (std::size_t t = 1; t <= tau; ++t) a.steps.emplace_back(random_unitary(a.layout_at(t).total_dim(), rng));
  return a;
}

AlgorithmSpec with_ignored_flags(const AlgorithmSpec& concealing) {
  if (concealing.signaling) throw Error("with_ignored_flags expects an error-concealing algorithm");
  AlgorithmSpec a = concealing;
  a.signaling = true;
  for (std::size_t t = 1; t <= a.tau; ++t) {
    const auto flags = static_cast<Eigen::Index>(pow_size(2, t));
    const Matrix id = Matrix::Identity(flags, flags);
    auto& step = a.steps[t - 1];
    if (auto* u = std::get_if<Matrix>(&step)) {
      *u = Eigen::kroneckerProduct(*u, id).eval();
    } else {
      for (auto& g : std::get<GateProgram>(step)) {
        const auto it = std::find(g.registers.begin(), g.registers.end(), kW);
        if (it == g.registers.end()) continue;
        if (g.kind != Gate::Kind::Dense || it + 1 != g.registers.end())
          throw Error("cannot extend a workspace gate over flag qubits unless W is its last register");
        g.matrix = Eigen::kroneckerProduct(g.matrix, id).eval();
      }
    }
  }
  return a;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

cplx parse_complex(const nlohmann::json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
  throw Error("complex numbers are written as a number or [re, im]");
}

Gate parse_gate(const nlohmann::json& j) {
  Gate g;
  const auto name = j.at("gate").get<std::string>();
  if (name == "dense") g.kind = Gate::Kind::Dense;
  else if (name == "diffusion") g.kind = Gate::Kind::Diffusion;
  else if (name == "hadamard") g.kind = Gate::Kind::Hadamard;
  else if (name == "shift") g.kind = Gate::Kind::Shift;
  else throw Error("unknown gate '" + name + "'");
  g.registers = j.at("registers").get<std::vector<std::string>>();
  if (g.kind == Gate::Kind::Dense) {
    const auto& rows = j.at("matrix");
    g.matrix = Matrix(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.at(0).size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t k = 0; k < rows[i].size(); ++k)
        g.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = parse_complex(rows[i][k]);
  }
  return g;
}

GateProgram parse_program(const nlohmann::json& j) {
  GateProgram p;
  for (const auto& g : j) p.push_back(parse_gate(g));
  return p;
}

}  // namespace

AlgorithmSpec algorithm_from_json(const nlohmann::json& j) {
  AlgorithmSpec a;
  a.n = j.at("n").get<std::size_t>();
  a.m = j.value("m", std::size_t{2});
  a.tau = j.at("tau").get<std::size_t>();
  a.ell = j.value("ell", std::size_t{0});
  a.signaling = j.value("signaling", false);
  const auto dim = a.layout_at(0).total_dim();
  const auto& init = j.contains("initial") ? j.at("initial") : nlohmann::json("uniform_minus");
  if (init.is_string()) {
    if (init.get<std::string>() != "uniform_minus") throw Error("unknown initial state '" + init.get<std::string>() + "'");
    if (a.m != 2) throw Error("uniform_minus needs m = 2");
    a.initial = Vector::Zero(static_cast<Eigen::Index>(dim));
    const auto wd = a.workspace_dim(0);
    const double amp = 1.0 / std::sqrt(2.0 * static_cast<double>(a.n));
    for (std::size_t x = 0; x < a.n; ++x) {
      a.initial(static_cast<Eigen::Index>((2 * x) * wd)) = amp;
      a.initial(static_cast<Eigen::Index>((2 * x + 1) * wd)) = -amp;
    }
  } else if (init.is_object()) {
    a.initial = PureState::basis(a.layout_at(0), init.at("basis").get<std::size_t>()).amplitudes;
  } else {
    a.initial = Vector(static_cast<Eigen::Index>(init.size()));
    for (std::size_t i = 0; i < init.size(); ++i) a.initial(static_cast<Eigen::Index>(i)) = parse_complex(init[i]);
  }
  if (j.contains("steps")) {
    for (const auto& s : j.at("steps")) a.steps.emplace_back(parse_program(s));
  } else if (j.contains("repeat_step")) {
    a.steps.assign(a.tau, parse_program(j.at("repeat_step")));
  }
  a.validate();
  return a;
}

}  // namespace noisyq
