#pragma once

// Noiseless and noisy oracle calls on the query register Q = Qi ⊗ Qo.
//
// Register naming convention used throughout the library: "Qi" (query input,
// dim n), "Qo" (query output, dim m), "W" (workspace, dim 2^k). Error flags
// are appended to W as its least significant qubit (0 = no error, 1 = error).

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "noisyq/qcore.hpp"

namespace noisyq {

inline const std::string kQi = "Qi";
inline const std::string kQo = "Qo";
inline const std::string kW = "W";

class TruthTable {
 public:
  TruthTable(std::size_t n, std::size_t m, std::vector<std::size_t> outputs);
  TruthTable(std::size_t n, std::size_t m, std::vector<std::size_t> outputs, std::size_t marked_value);

  // f_x: exactly one marked input x, m = 2, marked value 1.
  static TruthTable unique_marked(std::size_t n, std::size_t x);
  // Uniform f:[n]→[m], marked value 0.
  static TruthTable uniform_random(std::size_t n, std::size_t m, std::uint64_t seed);

  // Line-based text format: "n m" then one output per line. The marked value
  // is not serialized; parse() defaults it to 1 when m = 2 and 0 otherwise.
  std::string to_text() const;
  static TruthTable parse(std::string_view text);
  static TruthTable parse(std::string_view text, std::size_t marked_value);

  std::size_t n() const { return n_; }
  std::size_t m() const { return m_; }
  std::size_t operator()(std::size_t x) const { return outputs_[x]; }
  const std::vector<std::size_t>& outputs() const { return outputs_; }
  std::size_t marked_value() const { return marked_; }
  bool is_marked(std::size_t x) const { return outputs_[x] == marked_; }
  std::vector<std::size_t> marked_inputs() const;

 private:
  std::size_t n_;
  std::size_t m_;
  std::vector<std::size_t> outputs_;
  std::size_t marked_;
};

enum class NoiseKind { None, Depolarizing, Dephasing };

std::string to_string(NoiseKind kind);
NoiseKind parse_noise_kind(std::string_view text);

struct NoiseSpec {
  NoiseKind kind = NoiseKind::None;
  double p = 0.0;
  bool signaling = false;

  NoiseSpec() = default;
  NoiseSpec(NoiseKind k, double rate, bool signal = false);

  // kind = None behaves as p = 0.
  double effective_p() const { return kind == NoiseKind::None ? 0.0 : p; }
};

Matrix standard_oracle_unitary(const TruthTable& f);
Matrix phase_oracle_unitary(const TruthTable& f);

// 𝒩_1 for the given kind, on slots (Qi, Qo).
Channel complete_noise_channel(NoiseKind kind, std::size_t n, std::size_t m);
// 𝒩_p = (1-p)𝓘 + p𝒩_1 on slots (Qi, Qo). Requires spec.signaling = false.
Channel noise_channel(const NoiseSpec& spec, std::size_t n, std::size_t m);
// 𝒩_p^+ on slots (Qi, Qo, W): W of dimension w_dim grows to 2·w_dim.
Channel signaling_noise_channel(const NoiseSpec& spec, std::size_t n, std::size_t m, std::size_t w_dim);
// Measures the last flag of W and depolarizes Q when it reads "error".
// Slots (Qi, Qo, W).
Channel flag_conditioned_depolarizer(std::size_t n, std::size_t m, std::size_t w_dim);

// O_f conjugation via index remapping.
DensityState apply_standard_oracle(const DensityState& rho, const TruthTable& f);
PureState apply_standard_oracle(const PureState& psi, const TruthTable& f);

// 𝒩_p ∘ 𝒪_f on registers Qi, Qo of rho.
DensityState noisy_oracle_call(const DensityState& rho, const TruthTable& f, const NoiseSpec& spec);
// 𝒩_p^+ ∘ 𝒪_f; the output has W doubled in dimension (W is added with
// dimension 1 first if the layout has none).
DensityState signaling_noisy_oracle_call(const DensityState& rho, const TruthTable& f, const NoiseSpec& spec);

// One sampled realization of the noisy call on a pure state. Dephasing
// errors collapse Qi; depolarizing errors measure Q and re-prepare a uniformly
// random basis state of Q. In signaling mode W gains the flag qubit.
// Returns whether an error occurred.
bool noisy_oracle_trajectory(PureState& psi, const TruthTable& f, const NoiseSpec& spec, Rng& rng);

}  // namespace noisyq
