#pragma once

// Noisy-query algorithms: initial state, τ oracle calls interleaved with
// input-independent unitaries, final measurement of Qi.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "noisyq/oracles.hpp"
#include "noisyq/qcore.hpp"

namespace noisyq {

// Oracle-free primitive acting on named registers of Qi ⊗ Qo ⊗ W.
struct Gate {
  enum class Kind {
    Dense,      // matrix on `registers` (in order)
    Diffusion,  // 2|u⟩⟨u| − I on one register
    Hadamard,   // H on a dimension-2 register
    Shift,      // |v⟩ → |v+1 mod d⟩ on one register
  };
  Kind kind = Kind::Dense;
  std::vector<std::string> registers;
  Matrix matrix;
};

using GateProgram = std::vector<Gate>;
// Dense unitaries act on the whole algorithm register Qi ⊗ Qo ⊗ W.
using Step = std::variant<Matrix, GateProgram>;

struct AlgorithmSpec {
  std::size_t n = 0;
  std::size_t m = 2;
  std::size_t tau = 0;
  std::size_t ell = 0;
  // Unitary dimensions account for one flag qubit per query.
  bool signaling = false;
  // Amplitudes over Qi ⊗ Qo ⊗ W, W of ell qubits.
  Vector initial;
  std::vector<Step> steps;

  RegisterLayout layout_at(std::size_t queries_done) const;
  std::size_t workspace_dim(std::size_t queries_done) const;
  // Checks dimensions and unitarity (1e-10); reports the offending step.
  void validate() const;
};

PureState apply_step(const PureState& psi, const Step& step);
DensityState apply_step(const DensityState& rho, const Step& step);

struct RunResult {
  double success_probability = 0.0;
  std::optional<std::size_t> answer;
  bool success = false;
  std::size_t queries_used = 0;
};

struct ExactRun {
  RunResult result;
  DensityState final_state;
};

ExactRun run_exact(const AlgorithmSpec& alg, const TruthTable& f, const NoiseSpec& spec);

// Oracle hook for trajectory execution. Must perform one sampled noisy call.
using QueryFn = std::function<void(PureState&, Rng&)>;

struct TrajectoryRun {
  RunResult result;
  PureState final_state;
};

// Runs the algorithm with a caller-supplied oracle; `stop_after` permits early
// termination after that many queries.
TrajectoryRun execute_trajectory(const AlgorithmSpec& alg, const QueryFn& query,
                                 const std::function<bool(std::size_t)>& is_marked, Rng& rng,
                                 std::optional<std::size_t> stop_after = std::nullopt);

RunResult run_trajectory(const AlgorithmSpec& alg, const TruthTable& f, const NoiseSpec& spec, std::uint64_t seed);

struct InstanceFamily {
  enum class Kind { UniqueMarked, UniformRandom };
  Kind kind = Kind::UniqueMarked;
  // UniformRandom: exact enumeration only when m^n <= 4096, otherwise
  // `samples` seeded draws (0 = refuse).
  std::size_t samples = 0;
  std::uint64_t seed = 0;

  static InstanceFamily unique_marked() { return {}; }
  static InstanceFamily uniform_random(std::size_t samples = 0, std::uint64_t seed = 0) {
    return {Kind::UniformRandom, samples, seed};
  }
};

double average_success(const AlgorithmSpec& alg, const InstanceFamily& family, const NoiseSpec& spec);

// Standard Grover: Qi uniform, Qo in |−⟩, ell = 0, diffusion on Qi after
// every query.
AlgorithmSpec grover_algorithm(std::size_t n, std::size_t tau, bool signaling = false);
// Seeded random initial state and random dense unitaries.
AlgorithmSpec random_algorithm(std::size_t n, std::size_t m, std::size_t tau, std::size_t ell, bool signaling,
                               std::uint64_t seed);
// Same unitaries with identity on the flag qubits; used to compare
// signaling and concealing runs.
AlgorithmSpec with_ignored_flags(const AlgorithmSpec& concealing);

// JSON config: {"n", "m", "tau", "ell", "signaling", "initial", "steps"}.
// "initial" is "uniform_minus", {"basis": k} or a list of [re, im] pairs.
// Each step is a list of gates {"gate": "diffusion"|"hadamard"|"shift"|"dense",
// "registers": [...], "matrix": [[[re, im], ...], ...]}; steps may be omitted
// together with "repeat_step" to repeat one program τ times.
AlgorithmSpec algorithm_from_json(const nlohmann::json& j);

}  // namespace noisyq
