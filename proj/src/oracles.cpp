#include "noisyq/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace noisyq {

namespace {

bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

void check_query_registers(const RegisterLayout& l, const TruthTable& f) {
  if (!l.contains(kQi) || !l.contains(kQo))
    throw DimensionError("state has no query registers Qi/Qo");
  if (l.dim(kQi) != f.n() || l.dim(kQo) != f.m())
    throw DimensionError("query registers are " + std::to_string(l.dim(kQi)) + "x" + std::to_string(l.dim(kQo)) +
                         " but the oracle expects " + std::to_string(f.n()) + "x" + std::to_string(f.m()));
}

// Permutation of flat indices realizing O_f on a layout containing Qi, Qo.
std::vector<std::size_t> oracle_permutation(const RegisterLayout& l, const TruthTable& f) {
  check_query_registers(l, f);
  const auto si = l.stride(l.index_of(kQi));
  const auto so = l.stride(l.index_of(kQo));
  std::vector<std::size_t> perm(l.total_dim());
  for (std::size_t k = 0; k < perm.size(); ++k) {
    const auto x = (k / si) % f.n();
    const auto y = (k / so) % f.m();
    perm[k] = k - y * so + (y ^ f(x)) * so;
  }
  return perm;
}

RegisterLayout ensure_workspace(const RegisterLayout& l) {
  return l.contains(kW) ? l : l.appended({kW, 1});
}

}  // namespace

// ---------------------------------------------------------------------------
// TruthTable

TruthTable::TruthTable(std::size_t n, std::size_t m, std::vector<std::size_t> outputs)
    : TruthTable(n, m, std::move(outputs), m == 2 ? 1 : 0) {}

TruthTable::TruthTable(std::size_t n, std::size_t m, std::vector<std::size_t> outputs, std::size_t marked_value)
    : n_(n), m_(m), outputs_(std::move(outputs)), marked_(marked_value) {
  if (n_ == 0) throw Error("truth table needs n >= 1");
  if (m_ < 2 || !is_power_of_two(m_)) throw Error("truth table range m must be a power of two >= 2");
  if (outputs_.size() != n_) throw Error("truth table has " + std::to_string(outputs_.size()) + " entries, expected " +
                                         std::to_string(n_));
  for (auto v : outputs_)
    if (v >= m_) throw Error("truth table entry " + std::to_string(v) + " outside [0, m)");
  if (marked_ >= m_) throw Error("marked value outside [0, m)");
}

TruthTable TruthTable::unique_marked(std::size_t n, std::size_t x) {
  if (x >= n) throw Error("marked input outside [0, n)");
  std::vector<std::size_t> out(n, 0);
  out[x] = 1;
  return TruthTable(n, 2, std::move(out), 1);
}

TruthTable TruthTable::uniform_random(std::size_t n, std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, m - 1);
  std::vector<std::size_t> out(n);
  for (auto& v : out) v = pick(rng);
  return TruthTable(n, m, std::move(out), 0);
}

std::string TruthTable::to_text() const {
  std::ostringstream os;
  os << n_ << ' ' << m_ << '\n';
  for (auto v : outputs_) os << v << '\n';
  return os.str();
}

TruthTable TruthTable::parse(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::size_t n = 0, m = 0;
  if (!(is >> n >> m)) throw Error("truth table header must be 'n m'");
  return parse(text, m == 2 ? 1 : 0);
}

TruthTable TruthTable::parse(std::string_view text, std::size_t marked_value) {
  std::istringstream is{std::string(text)};
  std::size_t n = 0, m = 0;
  if (!(is >> n >> m)) throw Error("truth table header must be 'n m'");
  std::vector<std::size_t> out;
  std::size_t v = 0;
  while (is >> v) out.push_back(v);
  if (!is.eof()) throw Error("truth table contains a non-integer entry");
  return TruthTable(n, m, std::move(out), marked_value);
}

std::vector<std::size_t> TruthTable::marked_inputs() const {
  std::vector<std::size_t> xs;
  for (std::size_t x = 0; x < n_; ++x)
    if (is_marked(x)) xs.push_back(x);
  return xs;
}

// ---------------------------------------------------------------------------
// NoiseSpec

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::None: return "none";
    case NoiseKind::Depolarizing: return "depolarizing";
    case NoiseKind::Dephasing: return "dephasing";
  }
  return "?";
}

NoiseKind parse_noise_kind(std::string_view text) {
  if (text == "none") return NoiseKind::None;
  if (text == "depolarizing" || text == "polar") return NoiseKind::Depolarizing;
  if (text == "dephasing" || text == "phase") return NoiseKind::Dephasing;
  throw Error("unknown noise kind '" + std::string(text) + "' (expected none, depolarizing or dephasing)");
}

NoiseSpec::NoiseSpec(NoiseKind k, double rate, bool signal) : kind(k), p(rate), signaling(signal) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error("noise rate p must lie in [0, 1]");
}

// ---------------------------------------------------------------------------
// Unitaries

Matrix standard_oracle_unitary(const TruthTable& f) {
  const auto d = static_cast<Eigen::Index>(f.n() * f.m());
  Matrix u = Matrix::Zero(d, d);
  for (std::size_t x = 0; x < f.n(); ++x)
    for (std::size_t y = 0; y < f.m(); ++y)
      u(static_cast<Eigen::Index>(x * f.m() + (y ^ f(x))), static_cast<Eigen::Index>(x * f.m() + y)) = 1.0;
  return u;
}

Matrix phase_oracle_unitary(const TruthTable& f) {
  const auto d = static_cast<Eigen::Index>(f.n() * f.m());
  Matrix u = Matrix::Zero(d, d);
  for (std::size_t x = 0; x < f.n(); ++x)
    for (std::size_t y = 0; y < f.m(); ++y) {
      const int parity = __builtin_popcountll(static_cast<unsigned long long>(f(x) & y)) & 1;
      const auto k = static_cast<Eigen::Index>(x * f.m() + y);
      u(k, k) = parity ? -1.0 : 1.0;
    }
  return u;
}

// ---------------------------------------------------------------------------
// Channels

Channel complete_noise_channel(NoiseKind kind, std::size_t n, std::size_t m) {
  switch (kind) {
    case NoiseKind::None:
      return Channel::identity({n, m});
    case NoiseKind::Dephasing: {
      std::vector<KrausOperator> ops;
      for (std::size_t x = 0; x < n; ++x) {
        Matrix proj = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        proj(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x)) = 1.0;
        ops.push_back({KrausFactor{{0}, proj}});
      }
      return Channel::kraus({n, m}, {n, m}, std::move(ops));
    }
    case NoiseKind::Depolarizing: {
      const auto d = n * m;
      const double amp = 1.0 / std::sqrt(static_cast<double>(d));
      std::vector<KrausOperator> ops;
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) {
          Matrix k = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
          k(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = amp;
          ops.push_back({KrausFactor{{0, 1}, k}});
        }
      return Channel::kraus({n, m}, {n, m}, std::move(ops));
    }
  }
  throw Error("unknown noise kind");
}

Channel noise_channel(const NoiseSpec& spec, std::size_t n, std::size_t m) {
  if (spec.signaling) throw Error("noise_channel is the error-concealing channel; spec.signaling must be false");
  const double p = spec.effective_p();
  return Channel::mixture({{1.0 - p, Channel::identity({n, m})}, {p, complete_noise_channel(spec.kind, n, m)}});
}

namespace {

// I_W ⊗ |flag⟩ : W → W ⊗ flag.
Matrix flag_append(std::size_t w_dim, std::size_t flag) {
  const auto w = static_cast<Eigen::Index>(w_dim);
  Matrix a = Matrix::Zero(2 * w, w);
  for (Eigen::Index i = 0; i < w; ++i) a(2 * i + static_cast<Eigen::Index>(flag), i) = 1.0;
  return a;
}

}  // namespace

Channel signaling_noise_channel(const NoiseSpec& spec, std::size_t n, std::size_t m, std::size_t w_dim) {
  const double p = spec.effective_p();
  const std::vector<std::size_t> in{n, m, w_dim};
  const std::vector<std::size_t> out{n, m, 2 * w_dim};

  Channel ok = Channel::kraus(in, out, {KrausOperator{KrausFactor{{2}, flag_append(w_dim, 0)}}});

  const Channel inner = complete_noise_channel(spec.kind, n, m);
  std::vector<KrausOperator> err_ops;
  for (std::size_t k = 0; k < inner.kraus_count(); ++k) {
    KrausOperator op{KrausFactor{{0, 1}, inner.kraus_matrix(k)}, KrausFactor{{2}, flag_append(w_dim, 1)}};
    err_ops.push_back(std::move(op));
  }
  Channel err = Channel::kraus(in, out, std::move(err_ops));
  return Channel::mixture({{1.0 - p, std::move(ok)}, {p, std::move(err)}});
}

Channel flag_conditioned_depolarizer(std::size_t n, std::size_t m, std::size_t w_dim) {
  if (w_dim < 2 || w_dim % 2 != 0) throw DimensionError("workspace carries no flag qubit");
  const auto w = static_cast<Eigen::Index>(w_dim);
  Matrix keep = Matrix::Zero(w, w);
  Matrix hit = Matrix::Zero(w, w);
  for (Eigen::Index i = 0; i < w; ++i) (i % 2 == 0 ? keep : hit)(i, i) = 1.0;

  std::vector<KrausOperator> ops;
  ops.push_back({KrausFactor{{2}, keep}});
  const Channel dep = complete_noise_channel(NoiseKind::Depolarizing, n, m);
  for (std::size_t k = 0; k < dep.kraus_count(); ++k)
    ops.push_back({KrausFactor{{0, 1}, dep.kraus_matrix(k)}, KrausFactor{{2}, hit}});
  return Channel::kraus({n, m, w_dim}, {n, m, w_dim}, std::move(ops));
}

// ---------------------------------------------------------------------------
// Calls

DensityState apply_standard_oracle(const DensityState& rho, const TruthTable& f) {
  const auto perm = oracle_permutation(rho.layout, f);
  const auto d = rho.matrix.rows();
  Matrix out(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      out(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(perm[j])) = rho.matrix(i, j);
  return DensityState(rho.layout, std::move(out));
}

PureState apply_standard_oracle(const PureState& psi, const TruthTable& f) {
  const auto perm = oracle_permutation(psi.layout, f);
  Vector out(psi.amplitudes.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) out(static_cast<Eigen::Index>(perm[i])) = psi.amplitudes(i);
  return PureState(psi.layout, std::move(out), psi.unnormalized);
}

DensityState noisy_oracle_call(const DensityState& rho, const TruthTable& f, const NoiseSpec& spec) {
  if (spec.signaling) throw Error("noisy_oracle_call is error-concealing; use signaling_noisy_oracle_call");
  check_query_registers(rho.layout, f);
  const std::vector<std::string> q{kQi, kQo};
  return apply_channel(apply_standard_oracle(rho, f), noise_channel(spec, f.n(), f.m()), q);
}

DensityState signaling_noisy_oracle_call(const DensityState& rho, const TruthTable& f, const NoiseSpec& spec) {
  check_query_registers(rho.layout, f);
  DensityState in = rho;
  if (!rho.layout.contains(kW)) in = DensityState(ensure_workspace(rho.layout), rho.matrix);
  const auto w_dim = in.layout.dim(kW);
  const std::vector<std::string> q{kQi, kQo, kW};
  return apply_channel(apply_standard_oracle(in, f), signaling_noise_channel(spec, f.n(), f.m(), w_dim), q);
}

namespace {

// Append the flag qubit to W (least significant position).
PureState append_flag(const PureState& psi, std::size_t flag) {
  PureState in = psi;
  if (!psi.layout.contains(kW)) in = PureState(ensure_workspace(psi.layout), psi.amplitudes, psi.unnormalized);
  const auto wi = in.layout.index_of(kW);
  const auto w_dim = in.layout[wi].dim;
  auto out_layout = in.layout.with_dim(kW, 2 * w_dim);
  const auto stride_in = in.layout.stride(wi);
  const auto stride_out = out_layout.stride(wi);
  Vector out = Vector::Zero(static_cast<Eigen::Index>(out_layout.total_dim()));
  for (std::size_t k = 0; k < in.layout.total_dim(); ++k) {
    const auto hi = k / (stride_in * w_dim);
    const auto w = (k / stride_in) % w_dim;
    const auto lo = k % stride_in;
    const auto kk = hi * stride_out * 2 * w_dim + (2 * w + flag) * stride_out + lo;
    out(static_cast<Eigen::Index>(kk)) = in.amplitudes(static_cast<Eigen::Index>(k));
  }
  return PureState(std::move(out_layout), std::move(out), psi.unnormalized);
}

}  // namespace

bool noisy_oracle_trajectory(PureState& psi, const TruthTable& f, const NoiseSpec& spec, Rng& rng) {
  psi = apply_standard_oracle(psi, f);
  std::bernoulli_distribution coin(spec.effective_p());
  const bool error = spec.effective_p() > 0.0 && coin(rng);
  if (error) {
    if (spec.kind == NoiseKind::Dephasing) {
      psi = measure_sample(psi, kQi, rng).post_state;
    } else if (spec.kind == NoiseKind::Depolarizing) {
      const auto a = measure_sample(psi, kQi, rng);
      const auto b = measure_sample(a.post_state, kQo, rng);
      std::uniform_int_distribution<std::size_t> pick_x(0, f.n() - 1);
      std::uniform_int_distribution<std::size_t> pick_y(0, f.m() - 1);
      const auto nx = pick_x(rng);
      const auto ny = pick_y(rng);
      const auto& l = psi.layout;
      const auto si = l.stride(l.index_of(kQi));
      const auto so = l.stride(l.index_of(kQo));
      Vector out = Vector::Zero(psi.amplitudes.size());
      const Vector& src = b.post_state.amplitudes;
      for (Eigen::Index k = 0; k < src.size(); ++k) {
        if (src(k) == cplx(0.0)) continue;
        const auto kk = static_cast<std::size_t>(k) - a.outcome * si - b.outcome * so + nx * si + ny * so;
        out(static_cast<Eigen::Index>(kk)) = src(k);
      }
      psi = PureState(l, std::move(out));
    }
  }
  if (spec.signaling) psi = append_flag(psi, error ? 1 : 0);
  return error;
}

}  // namespace noisyq
