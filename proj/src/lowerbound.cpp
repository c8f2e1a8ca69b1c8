#include "noisyq/lowerbound.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <unsupported/Eigen/KroneckerProduct>

namespace noisyq {

std::string to_string(Mode mode) { return mode == Mode::WorstCase ? "worst" : "random"; }

Mode parse_mode(std::string_view text) {
  if (text == "worst" || text == "worst-case") return Mode::WorstCase;
  if (text == "random" || text == "random-function") return Mode::RandomFunction;
  throw Error("unknown mode '" + std::string(text) + "' (expected worst or random)");
}

std::string to_string(Subspace s) {
  switch (s) {
    case Subspace::A: return "A";
    case Subspace::B: return "B";
    case Subspace::C: return "C";
    case Subspace::BAct: return "B_act";
    case Subspace::BPas: return "B_pas";
    case Subspace::Succ: return "succ";
  }
  return "?";
}

std::string record_register(std::size_t i) { return "R" + std::to_string(i); }

namespace {

std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < e; ++i) r *= b;
  return r;
}

bool per_qi(Subspace s) { return s == Subspace::BAct || s == Subspace::BPas || s == Subspace::Succ; }

Matrix kron_all(const std::vector<Matrix>& factors) {
  Matrix out = Matrix::Ones(1, 1);
  for (const auto& f : factors) out = Eigen::kroneckerProduct(out, f).eval();
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Records

Record Record::decode(std::size_t index, std::size_t n, std::size_t length) {
  Record r;
  r.symbols.resize(length);
  for (std::size_t i = length; i-- > 0;) {
    r.symbols[i] = index % (n + 1);
    index /= n + 1;
  }
  return r;
}

std::size_t Record::encode(std::size_t n) const {
  std::size_t idx = 0;
  for (auto s : symbols) idx = idx * (n + 1) + s;
  return idx;
}

std::uint64_t Record::support() const {
  std::uint64_t mask = 0;
  for (auto s : symbols)
    if (s != 0) mask |= std::uint64_t{1} << (s - 1);
  return mask;
}

std::size_t Record::unrecorded(std::size_t n) const { return n - static_cast<std::size_t>(std::popcount(support())); }

Record Record::appended(std::size_t symbol) const {
  Record r = *this;
  r.symbols.push_back(symbol);
  return r;
}

std::size_t SpaceShape::record_dim() const { return ipow(n + 1, t); }
std::size_t SpaceShape::total() const { return f_dim * n * mid * record_dim(); }

// ---------------------------------------------------------------------------
// Projector family

ProjectorFamily::ProjectorFamily(Mode mode, std::size_t n, std::size_t m) : mode_(mode), n_(n), m_(m) {
  if (n == 0 || n > 62) throw DimensionError("projector family needs 1 <= n <= 62");
  if (mode == Mode::WorstCase) {
    if (m != 2) throw DimensionError("worst-case mode uses Boolean functions (m = 2)");
    f_dim_ = n;
  } else {
    if (m < 2 || (m & (m - 1)) != 0) throw DimensionError("m must be a power of two >= 2");
    const double dim = std::pow(static_cast<double>(m), static_cast<double>(n));
    if (dim > static_cast<double>(kDefaultAmplitudeCap))
      throw CapExceededError("truth register of dimension m^n = " + std::to_string(dim) + " exceeds the cap");
    f_dim_ = ipow(m, n);
  }
}

std::size_t ProjectorFamily::f_value(std::size_t f, std::size_t x) const {
  if (mode_ == Mode::WorstCase) return f == x ? 1 : 0;
  return (f / ipow(m_, n_ - 1 - x)) % m_;
}

Vector ProjectorFamily::initial_truth() const {
  return Vector::Constant(static_cast<Eigen::Index>(f_dim_), 1.0 / std::sqrt(static_cast<double>(f_dim_)));
}

Vector ProjectorFamily::psi(std::uint64_t support) const {
  if (mode_ != Mode::WorstCase) throw Error("psi_S is defined in worst-case mode only");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(n_));
  const auto nr = n_ - static_cast<std::size_t>(std::popcount(support));
  if (nr == 0) return v;
  for (std::size_t z = 0; z < n_; ++z)
    if (!(support >> z & 1)) v(static_cast<Eigen::Index>(z)) = 1.0 / std::sqrt(static_cast<double>(nr));
  return v;
}

Vector ProjectorFamily::f_tilde(std::uint64_t support, std::size_t x) const {
  const auto nr = n_ - static_cast<std::size_t>(std::popcount(support));
  Vector v = Vector::Zero(static_cast<Eigen::Index>(n_));
  if ((support >> x & 1) || nr < 2) return v;
  v(static_cast<Eigen::Index>(x)) = std::sqrt(static_cast<double>(nr));
  v -= psi(support);
  return v / std::sqrt(static_cast<double>(nr - 1));
}

Vector ProjectorFamily::m_tilde() const {
  if (mode_ != Mode::RandomFunction) throw Error("m-tilde is defined in random-function mode only");
  const double md = static_cast<double>(m_);
  Vector v = Vector::Constant(static_cast<Eigen::Index>(m_), -1.0 / std::sqrt(md * (md - 1.0)));
  v(0) = std::sqrt((md - 1.0) / md);
  return v;
}

Matrix ProjectorFamily::build_block(Subspace s, std::uint64_t support, std::size_t x) const {
  const auto d = static_cast<Eigen::Index>(f_dim_);
  if (mode_ == Mode::WorstCase) {
    auto outside = [&](std::uint64_t mask) {
      Matrix p = Matrix::Zero(d, d);
      for (std::size_t z = 0; z < n_; ++z)
        if (!(mask >> z & 1)) p(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(z)) = 1.0;
      return p;
    };
    const Vector ps = psi(support);
    switch (s) {
      case Subspace::A: return ps * ps.adjoint();
      case Subspace::B: return outside(support) - ps * ps.adjoint();
      case Subspace::C: return Matrix::Identity(d, d) - outside(support);
      case Subspace::BAct: {
        const Vector ft = f_tilde(support, x);
        return ft * ft.adjoint();
      }
      case Subspace::BPas: {
        const auto wider = support | (std::uint64_t{1} << x);
        const Vector pw = psi(wider);
        return outside(wider) - pw * pw.adjoint();
      }
      case Subspace::Succ: {
        Matrix p = Matrix::Zero(d, d);
        p(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x)) = 1.0;
        return p;
      }
    }
  }

  const auto md = static_cast<Eigen::Index>(m_);
  const Matrix id = Matrix::Identity(md, md);
  Matrix hat = Matrix::Zero(md, md);
  hat(0, 0) = 1.0;
  const Vector mt = m_tilde();
  const Matrix til = mt * mt.adjoint();
  auto in_s = [&](std::size_t y) { return (support >> y & 1) != 0; };
  auto product = [&](auto pick) {
    std::vector<Matrix> f;
    for (std::size_t y = 0; y < n_; ++y) f.push_back(pick(y));
    return kron_all(f);
  };
  const Matrix a = product([&](std::size_t y) -> Matrix { return in_s(y) ? Matrix(id - hat) : Matrix(id - til); });
  const Matrix no_hit = product([&](std::size_t y) -> Matrix { return in_s(y) ? Matrix(id - hat) : id; });
  auto act = [&]() -> Matrix {
    if (in_s(x)) return Matrix::Zero(d, d);
    return product([&](std::size_t y) -> Matrix {
      if (in_s(y)) return id - hat;
      return y == x ? til : Matrix(id - til);
    });
  };
  switch (s) {
    case Subspace::A: return a;
    case Subspace::B: return no_hit - a;
    case Subspace::C: return Matrix::Identity(d, d) - no_hit;
    case Subspace::BAct: return act();
    case Subspace::BPas: return no_hit - a - act();
    case Subspace::Succ: return product([&](std::size_t y) -> Matrix { return y == x ? hat : id; });
  }
  throw Error("unknown subspace");
}

const Matrix& ProjectorFamily::block(Subspace s, std::uint64_t support, std::size_t x) const {
  const auto key = std::make_tuple(static_cast<int>(s), support, per_qi(s) ? x : 0);
  auto it = blocks_.find(key);
  if (it == blocks_.end()) it = blocks_.emplace(key, build_block(s, support, x)).first;
  return it->second;
}

const Matrix& ProjectorFamily::block_basis(Subspace s, std::uint64_t support, std::size_t x) const {
  const auto key = std::make_tuple(static_cast<int>(s), support, per_qi(s) ? x : 0);
  auto it = bases_.find(key);
  if (it != bases_.end()) return it->second;
  Eigen::SelfAdjointEigenSolver<Matrix> es(block(s, support, x));
  std::vector<Eigen::Index> cols;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > 0.5) cols.push_back(i);
  Matrix basis(static_cast<Eigen::Index>(f_dim_), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) basis.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(cols[k]);
  return bases_.emplace(key, std::move(basis)).first->second;
}

std::vector<std::uint64_t> ProjectorFamily::supports(std::size_t t) const {
  const auto rd = ipow(n_ + 1, t);
  std::vector<std::uint64_t> out(rd);
  for (std::size_t r = 0; r < rd; ++r) out[r] = Record::decode(r, n_, t).support();
  return out;
}

Matrix ProjectorFamily::materialize(Subspace s, std::size_t t) const {
  const auto rd = ipow(n_ + 1, t);
  const auto sup = supports(t);
  const std::size_t xs = per_qi(s) ? n_ : 1;
  const auto dim = static_cast<Eigen::Index>(f_dim_ * xs * rd);
  if (static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim) > kDefaultAmplitudeCap)
    throw CapExceededError("materialized projector would exceed the cap; use sparse()");
  Matrix out = Matrix::Zero(dim, dim);
  for (std::size_t x = 0; x < xs; ++x)
    for (std::size_t r = 0; r < rd; ++r) {
      const Matrix& b = block(s, sup[r], x);
      for (std::size_t f = 0; f < f_dim_; ++f)
        for (std::size_t g = 0; g < f_dim_; ++g)
          out(static_cast<Eigen::Index>((f * xs + x) * rd + r), static_cast<Eigen::Index>((g * xs + x) * rd + r)) =
              b(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(g));
    }
  return out;
}

SparseMatrix ProjectorFamily::sparse(Subspace s, const SpaceShape& shape) const {
  if (shape.f_dim != f_dim_ || shape.n != n_) throw DimensionError("space shape does not match the family");
  const auto rd = shape.record_dim();
  const auto sup = supports(shape.t);
  const auto total = static_cast<Eigen::Index>(shape.total());
  std::vector<Eigen::Triplet<cplx>> trips;
  for (std::size_t x = 0; x < n_; ++x)
    for (std::size_t r = 0; r < rd; ++r) {
      const Matrix& b = block(s, sup[r], x);
      for (std::size_t f = 0; f < f_dim_; ++f)
        for (std::size_t g = 0; g < f_dim_; ++g) {
          const cplx v = b(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(g));
          if (std::abs(v) < 1e-15) continue;
          for (std::size_t j = 0; j < shape.mid; ++j)
            trips.emplace_back(static_cast<Eigen::Index>(((f * n_ + x) * shape.mid + j) * rd + r),
                               static_cast<Eigen::Index>(((g * n_ + x) * shape.mid + j) * rd + r), v);
        }
    }
  SparseMatrix out(total, total);
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

SparseMatrix ProjectorFamily::range_basis(Subspace s, const SpaceShape& shape) const {
  if (shape.f_dim != f_dim_ || shape.n != n_) throw DimensionError("space shape does not match the family");
  const auto rd = shape.record_dim();
  const auto sup = supports(shape.t);
  std::vector<Eigen::Triplet<cplx>> trips;
  Eigen::Index col = 0;
  for (std::size_t x = 0; x < n_; ++x)
    for (std::size_t r = 0; r < rd; ++r) {
      const Matrix& b = block_basis(s, sup[r], x);
      for (std::size_t j = 0; j < shape.mid; ++j)
        for (Eigen::Index k = 0; k < b.cols(); ++k, ++col)
          for (std::size_t f = 0; f < f_dim_; ++f) {
            const cplx v = b(static_cast<Eigen::Index>(f), k);
            if (std::abs(v) < 1e-15) continue;
            trips.emplace_back(static_cast<Eigen::Index>(((f * n_ + x) * shape.mid + j) * rd + r), col, v);
          }
    }
  SparseMatrix out(static_cast<Eigen::Index>(shape.total()), col);
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

namespace {

SpaceShape shape_of(const ProjectorFamily& fam, const RegisterLayout& l) {
  if (l.size() < 4 || l[0].name != kF || l[1].name != kQi || l[0].dim != fam.f_dim() || l[1].dim != fam.n())
    throw DimensionError("not an extended-state layout for this projector family");
  SpaceShape s{fam.f_dim(), fam.n(), l[2].dim * l[3].dim, l.size() - 4};
  return s;
}

}  // namespace

PureState ProjectorFamily::apply(Subspace s, const PureState& extended) const {
  const auto shape = shape_of(*this, extended.layout);
  const auto rd = shape.record_dim();
  const auto sup = supports(shape.t);
  const auto fstride = n_ * shape.mid * rd;
  Vector out = Vector::Zero(extended.amplitudes.size());
  Vector in(static_cast<Eigen::Index>(f_dim_));
  for (std::size_t x = 0; x < n_; ++x)
    for (std::size_t j = 0; j < shape.mid; ++j)
      for (std::size_t r = 0; r < rd; ++r) {
        const auto base = (x * shape.mid + j) * rd + r;
        for (std::size_t f = 0; f < f_dim_; ++f) in(static_cast<Eigen::Index>(f)) = extended.amplitudes(static_cast<Eigen::Index>(f * fstride + base));
        const Vector res = block(s, sup[r], x) * in;
        for (std::size_t f = 0; f < f_dim_; ++f) out(static_cast<Eigen::Index>(f * fstride + base)) = res(static_cast<Eigen::Index>(f));
      }
  return PureState(extended.layout, std::move(out), true);
}

double ProjectorFamily::overlap(Subspace s, const PureState& extended) const {
  return apply(s, extended).amplitudes.squaredNorm();
}

// ---------------------------------------------------------------------------
// Extended oracles

RegisterLayout extended_layout(const ProjectorFamily& fam, std::size_t w_dim, std::size_t t) {
  std::vector<Register> regs{{kF, fam.f_dim()}, {kQi, fam.n()}, {kQo, fam.m()}, {kW, w_dim}};
  for (std::size_t i = 1; i <= t; ++i) regs.push_back({record_register(i), fam.n() + 1});
  return RegisterLayout(std::move(regs));
}

namespace {

void check_cap(const ProjectorFamily& fam, std::size_t w_dim, std::size_t t, std::size_t cap) {
  const double total = static_cast<double>(fam.f_dim()) * static_cast<double>(fam.n()) *
                       static_cast<double>(fam.m()) * static_cast<double>(w_dim) *
                       std::pow(static_cast<double>(fam.n() + 1), static_cast<double>(t));
  if (total > static_cast<double>(cap))
    throw CapExceededError("extended space at t = " + std::to_string(t) + " has " + std::to_string(total) +
                           " amplitudes, above the cap of " + std::to_string(cap));
}

// Calls visit(in_index, out_index) for every basis state of the branch.
template <typename Visit>
void for_each_transition(const ProjectorFamily& fam, OracleBranch branch, std::size_t t, std::size_t w_dim,
                         Visit&& visit) {
  const auto n = fam.n();
  const auto m = fam.m();
  const auto rd = ipow(n + 1, t);
  const std::size_t flag = branch == OracleBranch::Quantum ? 0 : 1;
  for (std::size_t f = 0; f < fam.f_dim(); ++f)
    for (std::size_t x = 0; x < n; ++x) {
      const auto fx = fam.f_value(f, x);
      const std::size_t sym = branch == OracleBranch::Quantum ? 0 : x + 1;
      for (std::size_t y = 0; y < m; ++y)
        for (std::size_t w = 0; w < w_dim; ++w)
          for (std::size_t r = 0; r < rd; ++r) {
            const auto in = (((f * n + x) * m + y) * w_dim + w) * rd + r;
            const auto out = (((f * n + x) * m + (y ^ fx)) * 2 * w_dim + 2 * w + flag) * rd * (n + 1) + r * (n + 1) + sym;
            visit(in, out);
          }
    }
}

}  // namespace

SparseMatrix extended_oracle(const ProjectorFamily& fam, OracleBranch branch, std::size_t t, std::size_t w_dim,
                             std::size_t cap) {
  check_cap(fam, 2 * w_dim, t + 1, cap);
  const auto in_dim = static_cast<Eigen::Index>(extended_layout(fam, w_dim, t).total_dim());
  const auto out_dim = static_cast<Eigen::Index>(extended_layout(fam, 2 * w_dim, t + 1).total_dim());
  std::vector<Eigen::Triplet<cplx>> trips;
  trips.reserve(static_cast<std::size_t>(in_dim));
  for_each_transition(fam, branch, t, w_dim, [&](std::size_t in, std::size_t out) {
    trips.emplace_back(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in), 1.0);
  });
  SparseMatrix o(out_dim, in_dim);
  o.setFromTriplets(trips.begin(), trips.end());
  return o;
}

SparseMatrix ExtendedOracles::noisy(double p) const {
  return SparseMatrix(std::sqrt(1.0 - p) * quantum + std::sqrt(p) * classical);
}

ExtendedOracles build_extended_oracles(std::size_t t, std::size_t n, std::size_t m, Mode mode, std::size_t cap) {
  const ProjectorFamily fam(mode, n, m);
  return {extended_oracle(fam, OracleBranch::Quantum, t, 1, cap), extended_oracle(fam, OracleBranch::Classical, t, 1, cap)};
}

PureState apply_extended_oracle(const ProjectorFamily& fam, const PureState& state, OracleBranch branch) {
  const auto shape = shape_of(fam, state.layout);
  const auto w_dim = state.layout.dim(kW);
  auto out_layout = extended_layout(fam, 2 * w_dim, shape.t + 1);
  Vector out = Vector::Zero(static_cast<Eigen::Index>(out_layout.total_dim()));
  for_each_transition(fam, branch, shape.t, w_dim, [&](std::size_t in, std::size_t o) {
    out(static_cast<Eigen::Index>(o)) = state.amplitudes(static_cast<Eigen::Index>(in));
  });
  return PureState(std::move(out_layout), std::move(out), state.unnormalized);
}

PureState apply_extended_oracle(const ProjectorFamily& fam, const PureState& state, double p) {
  auto q = apply_extended_oracle(fam, state, OracleBranch::Quantum);
  const auto c = apply_extended_oracle(fam, state, OracleBranch::Classical);
  q.amplitudes = std::sqrt(1.0 - p) * q.amplitudes + std::sqrt(p) * c.amplitudes;
  return q;
}

DensityState extended_call_traced(std::size_t n, std::size_t z, double p, const DensityState& rho_q) {
  const ProjectorFamily fam(Mode::WorstCase, n, 2);
  const RegisterLayout q_layout({{kQi, n}, {kQo, 2}});
  if (!(rho_q.layout == q_layout)) throw DimensionError("expected a state on Qi ⊗ Qo");
  const SparseMatrix op = ExtendedOracles{extended_oracle(fam, OracleBranch::Quantum, 0),
                                          extended_oracle(fam, OracleBranch::Classical, 0)}
                              .noisy(p);
  const Matrix dense(op);
  const auto din = static_cast<Eigen::Index>(2 * n);
  const auto dout = static_cast<Eigen::Index>(4 * n);
  const auto rd = static_cast<Eigen::Index>(n + 1);
  Matrix out = Matrix::Zero(dout, dout);
  for (Eigen::Index r = 0; r < rd; ++r) {
    Matrix k(dout, din);
    for (Eigen::Index o = 0; o < dout; ++o)
      for (Eigen::Index i = 0; i < din; ++i)
        k(o, i) = dense((static_cast<Eigen::Index>(z) * dout + o) * rd + r, static_cast<Eigen::Index>(z) * din + i);
    out += k * rho_q.matrix * k.adjoint();
  }
  return DensityState(RegisterLayout({{kQi, n}, {kQo, 2}, {kW, 2}}), std::move(out));
}

// ---------------------------------------------------------------------------
// Progress measure

namespace {

StepEntry measure_step(const ProjectorFamily& fam, const PureState& phi, std::size_t t) {
  StepEntry e;
  e.t = t;
  e.a = fam.overlap(Subspace::A, phi);
  e.b = fam.overlap(Subspace::B, phi);
  e.c = fam.overlap(Subspace::C, phi);
  e.b_act = fam.overlap(Subspace::BAct, phi);
  e.b_pas = fam.overlap(Subspace::BPas, phi);
  e.psi = e.c + fam.scalar() * e.b;
  return e;
}

std::optional<double> increment_bound(const ProjectorFamily& fam, double p, std::size_t t) {
  if (p <= 0.0) return std::nullopt;
  if (fam.mode() == Mode::WorstCase) {
    if (fam.n() < t + 2) return std::nullopt;
    return 48.0 / (p * static_cast<double>(fam.n() - t - 1));
  }
  return 32.0 / (p * static_cast<double>(fam.m() - 1));
}

}  // namespace

ExtendedRun run_extended(const AlgorithmSpec& alg_in, double p, Mode mode, std::size_t cap) {
  if (p < 0.0 || p > 1.0) throw Error("p must lie in [0, 1]");
  const ProjectorFamily fam(mode, alg_in.n, alg_in.m);
  const AlgorithmSpec alg = alg_in.signaling ? alg_in : with_ignored_flags(alg_in);
  alg.validate();
  for (std::size_t t = 0; t <= alg.tau; ++t) check_cap(fam, alg.workspace_dim(t), t, cap);

  PureState phi(extended_layout(fam, alg.workspace_dim(0), 0),
                Eigen::kroneckerProduct(fam.initial_truth(), alg.initial).eval());
  ProgressTrace trace;
  trace.mode = mode;
  trace.n = alg.n;
  trace.m = alg.m;
  trace.p = p;
  trace.steps.push_back(measure_step(fam, phi, 0));

  for (std::size_t t = 0; t < alg.tau; ++t) {
    const auto oq = apply_extended_oracle(fam, phi, OracleBranch::Quantum);
    const auto oc = apply_extended_oracle(fam, phi, OracleBranch::Classical);
    const auto& cur = trace.steps.back();
    const double act = std::sqrt(cur.b_act);
    const double qb = fam.overlap(Subspace::B, oq);
    const double cb = fam.overlap(Subspace::B, oc);
    const double qc = fam.overlap(Subspace::C, oq);
    const double cc = fam.overlap(Subspace::C, oc);

    LemmaStep ls;
    ls.t = t;
    if (mode == Mode::WorstCase) {
      const double nt = static_cast<double>(alg.n) - static_cast<double>(t) - 1.0;
      if (nt > 0.0) {
        const double s = act + 2.0 / std::sqrt(nt);
        ls.items.push_back({"B_QO_bound", qb, s * s + cur.b_pas, false});
      }
      ls.items.push_back({"B_CO_equality", cb, cur.b_pas, true});
      ls.items.push_back({"C_QO_equality", qc, cur.c, true});
      if (nt > 0.0) ls.items.push_back({"C_CO_bound", cc, cur.c + 2.0 * cur.b_act + 2.0 / nt, false});
    } else {
      const double m1 = static_cast<double>(alg.m) - 1.0;
      const auto pas_c = apply_extended_oracle(fam, fam.apply(Subspace::BPas, phi), OracleBranch::Classical);
      const double pas_to_c = fam.overlap(Subspace::C, pas_c);
      const double pas_to_pas = fam.overlap(Subspace::BPas, pas_c);
      const double s = act + std::sqrt(2.0) / std::sqrt(m1);
      ls.items.push_back({"B_QO_bound", qb, s * s + cur.b_pas, false});
      ls.items.push_back({"B_CO_equality_pas", cb, pas_to_pas, true});
      ls.items.push_back({"B_CO_equality_split", cb, cur.b_pas - pas_to_c, true});
      ls.items.push_back({"C_QO_equality", qc, cur.c, true});
      ls.items.push_back({"C_CO_bound", cc, cur.c + 3.0 * cur.b_act + 3.0 * pas_to_c + 3.0 / m1, false});
    }

    PureState next = oq;
    next.amplitudes = std::sqrt(1.0 - p) * oq.amplitudes + std::sqrt(p) * oc.amplitudes;
    next.unnormalized = false;
    phi = apply_step(next, alg.steps[t]);

    auto entry = measure_step(fam, phi, t + 1);
    entry.increment = entry.psi - cur.psi;
    entry.increment_bound = increment_bound(fam, p, t);
    const double split = (1.0 - p) * (qc + fam.scalar() * qb) + p * (cc + fam.scalar() * cb);
    ls.items.push_back({"psi_split", entry.psi, split, true});
    trace.lemma.push_back(std::move(ls));
    trace.steps.push_back(entry);
  }

  trace.q_succ = fam.overlap(Subspace::Succ, phi);
  const double tail = mode == Mode::WorstCase
                          ? (alg.n > alg.tau ? 2.0 / static_cast<double>(alg.n - alg.tau) : INFINITY)
                          : 2.0 / static_cast<double>(alg.m);
  trace.final_bound = trace.steps.back().psi + tail;
  return {std::move(trace), std::move(phi)};
}

// ---------------------------------------------------------------------------
// Verification

namespace {

constexpr double kExactTol = 1e-10;
constexpr double kAlgebraTol = 1e-12;
constexpr double kNormTol = 1e-9;

struct Ctx {
  Mode mode;
  std::size_t n, m, t;
  std::vector<CheckRow>* rows;

  void zero(const std::string& name, double residual, double tol = kExactTol, bool asserted = true) const {
    rows->push_back({mode, n, m, t, std::nullopt, name, residual, 0.0, residual, residual <= tol, asserted});
  }
  void value(const std::string& name, double computed, double expected, bool asserted = true) const {
    const double r = std::abs(computed - expected);
    rows->push_back({mode, n, m, t, std::nullopt, name, computed, expected, r, r <= kNormTol, asserted});
  }
  void at_most(const std::string& name, double computed, double bound, bool asserted) const {
    rows->push_back({mode, n, m, t, std::nullopt, name, computed, bound, computed - bound,
                     computed <= bound + kNormTol, asserted});
  }
};

SparseMatrix identity(Eigen::Index d) {
  SparseMatrix i(d, d);
  i.setIdentity();
  return i;
}

double norm_on_range(const SparseMatrix& m, const SparseMatrix& basis) {
  const SparseMatrix mv = m * basis;
  if (mv.cols() == 0) return 0.0;
  if (mv.cols() <= 4096) {
    const Matrix g = Matrix(SparseMatrix(mv.adjoint() * mv));
    Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
  }
  return operator_norm(mv);
}

struct Spaces {
  ProjectorFamily fam;
  SpaceShape in, out;
  SparseMatrix oq, oc;

  Spaces(std::size_t t, std::size_t n, std::size_t m, Mode mode, std::size_t cap)
      : fam(mode, n, m),
        in{fam.f_dim(), n, m, t},
        out{fam.f_dim(), n, 2 * m, t + 1},
        oq(extended_oracle(fam, OracleBranch::Quantum, t, 1, cap)),
        oc(extended_oracle(fam, OracleBranch::Classical, t, 1, cap)) {}

  SparseMatrix pin(Subspace s) const { return fam.sparse(s, in); }
  SparseMatrix pout(Subspace s) const { return fam.sparse(s, out); }
};

void check_t(std::size_t n, std::size_t t, Mode mode) {
  if (mode == Mode::WorstCase && t >= n) throw Error("need t < n so that unrecorded inputs remain");
}

}  // namespace

std::vector<CheckRow> verify_claim_identities(std::size_t t, std::size_t n, std::size_t m, Mode mode, std::size_t cap) {
  check_t(n, t, mode);
  std::vector<CheckRow> rows;
  const Ctx ctx{mode, n, mode == Mode::WorstCase ? 2 : m, t, &rows};
  const Spaces sp(t, n, ctx.m, mode, cap);
  const auto& fam = sp.fam;

  const auto A = sp.pin(Subspace::A), B = sp.pin(Subspace::B), C = sp.pin(Subspace::C);
  const auto Act = sp.pin(Subspace::BAct), Pas = sp.pin(Subspace::BPas);
  const auto A1 = sp.pout(Subspace::A), B1 = sp.pout(Subspace::B), C1 = sp.pout(Subspace::C);
  const auto Act1 = sp.pout(Subspace::BAct), Pas1 = sp.pout(Subspace::BPas);
  const auto Iin = identity(A.rows()), Iout = identity(A1.rows());
  const auto& OQ = sp.oq;
  const auto& OC = sp.oc;

  // Projector algebra and isometries.
  ctx.zero("projectors.completeness", max_abs(SparseMatrix(A + B + C - Iin)), kAlgebraTol);
  ctx.zero("projectors.active_passive_split", max_abs(SparseMatrix(Act + Pas - B)), kAlgebraTol);
  double idem = 0.0, herm = 0.0;
  for (const auto* p : {&A, &B, &C, &Act, &Pas}) {
    idem = std::max(idem, max_abs(SparseMatrix(*p * *p - *p)));
    herm = std::max(herm, max_abs(SparseMatrix(*p - SparseMatrix(p->adjoint()))));
  }
  ctx.zero("projectors.idempotent", idem, kAlgebraTol);
  ctx.zero("projectors.hermitian", herm, kAlgebraTol);
  ctx.zero("oracle.OQ_isometry", max_abs(SparseMatrix(SparseMatrix(OQ.adjoint()) * OQ - Iin)), kAlgebraTol);
  ctx.zero("oracle.OC_isometry", max_abs(SparseMatrix(SparseMatrix(OC.adjoint()) * OC - Iin)), kAlgebraTol);
  ctx.zero("oracle.flag_orthogonality", max_abs(SparseMatrix(SparseMatrix(OQ.adjoint()) * OC)), kAlgebraTol);
  const ExtendedOracles both{OQ, OC};
  double op_res = 0.0;
  for (double p : {0.0, 0.3, 1.0}) {
    const auto op = both.noisy(p);
    op_res = std::max(op_res, max_abs(SparseMatrix(SparseMatrix(op.adjoint()) * op - Iin)));
  }
  ctx.zero("oracle.Op_isometry", op_res, kAlgebraTol);

  if (mode == Mode::WorstCase) {
    double orth = 0.0, eq51 = 0.0;
    const auto rd = ipow(n + 1, t);
    for (std::size_t r = 0; r < rd; ++r) {
      const auto s = Record::decode(r, n, t).support();
      for (std::size_t x = 0; x < n; ++x) {
        if ((s >> x & 1) || n - static_cast<std::size_t>(std::popcount(s)) < 2) continue;
        const auto wider = s | (std::uint64_t{1} << x);
        const Vector ps = fam.psi(s), ft = fam.f_tilde(s, x), pw = fam.psi(wider);
        Vector ex = Vector::Zero(static_cast<Eigen::Index>(n));
        ex(static_cast<Eigen::Index>(x)) = 1.0;
        orth = std::max({orth, std::abs(ps.dot(ft)), std::abs(pw.dot(ex))});
        eq51 = std::max(eq51, max_abs(Matrix(ps * ps.adjoint() + ft * ft.adjoint() - pw * pw.adjoint() - ex * ex.adjoint())));
      }
    }
    ctx.zero("vectors.orthogonality", orth, kAlgebraTol);
    ctx.zero("vectors.rank_two_identity", eq51, kAlgebraTol);
  } else {
    ctx.zero("vectors.m_tilde_uniform_orthogonal", std::abs(fam.m_tilde().sum()), kAlgebraTol);
  }

  // Record non-alterability.
  const std::string c1 = mode == Mode::WorstCase ? "claim5.1." : "claimA.1.";
  ctx.zero(c1 + "OQ_commutes_with_C", max_abs(SparseMatrix(OQ * C - C1 * OQ)));
  ctx.zero(c1 + "OC_keeps_C", max_abs(SparseMatrix((Iout - C1) * OC * C)));
  const SparseMatrix from_c = C1 * OC * C;
  const SparseMatrix from_rest = C1 * OC * SparseMatrix(A + B);
  ctx.zero(c1 + "image_orthogonality", max_abs(SparseMatrix(SparseMatrix(from_c.adjoint()) * from_rest)));

  if (mode == Mode::WorstCase) {
    ctx.zero("claim5.2.OQ_keeps_passive", max_abs(SparseMatrix((Iout - Pas1) * OQ * Pas)));
    ctx.zero("claim5.2.OC_keeps_passive", max_abs(SparseMatrix((Iout - Pas1) * OC * Pas)));
    ctx.zero("claim5.2.OQ_commutes_with_passive", max_abs(SparseMatrix(OQ * Pas - Pas1 * OQ)));
    ctx.zero("claim5.2.OC_commutes_with_passive", max_abs(SparseMatrix(OC * Pas - Pas1 * OC)));
    ctx.zero("claimOQonAct.OC_maps_active_into_C_plus_A", max_abs(SparseMatrix((Iout - C1 - A1) * OC * Act)));
    ctx.zero("claim5.4.B_OC_A_zero", max_abs(SparseMatrix(B1 * OC * A)));
    ctx.zero("claim5.3.B_equals_Bact_on_OQ_A", max_abs(SparseMatrix(B1 * OQ * A - Act1 * OQ * A)));
  } else {
    ctx.zero("claimA.2.B_OQ_act_is_act", max_abs(SparseMatrix(B1 * OQ * Act - Act1 * OQ * Act)));
    ctx.zero("claimA.2.B_OQ_pas_is_pas", max_abs(SparseMatrix(B1 * OQ * Pas - Pas1 * OQ * Pas)));
    ctx.zero("claimA.2.OC_maps_active_into_C_plus_A", max_abs(SparseMatrix((Iout - C1 - A1) * OC * Act)));
    ctx.zero("claimA.3.B_equals_Bact_on_OQ_A", max_abs(SparseMatrix(B1 * OQ * A - Act1 * OQ * A)));
    ctx.zero("claimA.4.B_OC_A_zero", max_abs(SparseMatrix(B1 * OC * A)));
    ctx.zero("claimA.2.OQ_commutes_with_passive", max_abs(SparseMatrix(OQ * Pas - Pas1 * OQ)));
  }
  return rows;
}

std::vector<CheckRow> verify_claim_norms(std::size_t t, std::size_t n, std::size_t m, Mode mode, std::size_t cap) {
  check_t(n, t, mode);
  std::vector<CheckRow> rows;
  const Ctx ctx{mode, n, mode == Mode::WorstCase ? 2 : m, t, &rows};
  const Spaces sp(t, n, ctx.m, mode, cap);
  const auto& fam = sp.fam;
  const auto va = fam.range_basis(Subspace::A, sp.in);
  const SparseMatrix succ = fam.sparse(Subspace::Succ, sp.in);
  const double a_to_bact = norm_on_range(sp.pout(Subspace::BAct) * sp.oq, va);
  const double a_to_c = norm_on_range(sp.pout(Subspace::C) * sp.oc, va);
  const double succ_a = norm_on_range(succ, va);

  if (mode == Mode::WorstCase) {
    const double nt = static_cast<double>(n - t);
    ctx.value("claim5.3.norm", a_to_bact, 2.0 * std::sqrt(nt - 1.0) / nt);
    ctx.value("claim5.4.norm_squared", a_to_c * a_to_c, 1.0 / nt);
    ctx.value("succ_times_A.norm", succ_a, 1.0 / std::sqrt(nt));
    const auto vact = fam.range_basis(Subspace::BAct, sp.in);
    ctx.at_most("footnote.A_OC_Bact.norm", norm_on_range(sp.pout(Subspace::A) * sp.oc, vact), 1.0 / std::sqrt(nt),
                false);
  } else {
    const double md = static_cast<double>(ctx.m);
    ctx.value("claimA.3.norm", a_to_bact, std::sqrt(2.0 * md - 3.0) / (md - 1.0));
    ctx.value("claimA.4.norm", a_to_c, 1.0 / std::sqrt(md));
    ctx.value("succ_times_A.norm", succ_a, 1.0 / std::sqrt(md));
  }
  return rows;
}

std::vector<CheckRow> verify_lemma_inequalities(const AlgorithmSpec& alg, double p, Mode mode, std::size_t cap) {
  if (!(p > 0.0)) throw Error("the lemma checks need p > 0");
  if (mode == Mode::WorstCase && alg.n < alg.tau + 2)
    throw Error("worst-case lemma checks need n - tau >= 2 (the bounds divide by n - t - 1)");
  const auto run = run_extended(alg, p, mode, cap);
  const auto& tr = run.trace;
  std::vector<CheckRow> rows;
  auto add = [&](std::size_t t, const std::string& name, double lhs, double rhs, bool equality, double tol) {
    const double res = equality ? std::abs(lhs - rhs) : lhs - rhs;
    rows.push_back({mode, alg.n, alg.m, t, p, name, lhs, rhs, res, res <= tol, true});
  };
  add(0, "psi_0", tr.steps.front().psi, 0.0, true, kExactTol);
  for (const auto& st : tr.steps)
    for (double v : {st.a, st.b, st.c, st.b_act, st.b_pas}) {
      if (v < -kExactTol || v > 1.0 + kExactTol) add(st.t, "overlap_range", v, 1.0, false, kExactTol);
    }
  for (const auto& ls : tr.lemma)
    for (const auto& it : ls.items) add(ls.t, it.name, it.lhs, it.rhs, it.equality, kNormTol);
  for (std::size_t i = 1; i < tr.steps.size(); ++i) {
    const auto& st = tr.steps[i];
    if (st.increment_bound) add(i - 1, "increment_bound", *st.increment, *st.increment_bound, false, kNormTol);
  }
  add(tr.steps.back().t, "final_success_bound", tr.q_succ, tr.final_bound, false, kNormTol);
  return rows;
}

bool all_pass(const std::vector<CheckRow>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const CheckRow& r) { return !r.asserted || r.pass; });
}

}  // namespace noisyq
