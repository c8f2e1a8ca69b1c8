#include "noisyq/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace noisyq {

// ---------------------------------------------------------------------------
// RegisterLayout

RegisterLayout::RegisterLayout(std::vector<Register> registers) : registers_(std::move(registers)) {
  std::unordered_set<std::string> seen;
  for (const auto& r : registers_) {
    if (r.dim == 0) throw DimensionError("register '" + r.name + "' has dimension 0");
    if (!seen.insert(r.name).second) throw DimensionError("duplicate register name '" + r.name + "'");
  }
  strides_.assign(registers_.size(), 1);
  total_ = 1;
  for (std::size_t i = registers_.size(); i-- > 0;) {
    strides_[i] = total_;
    total_ *= registers_[i].dim;
  }
}

bool RegisterLayout::contains(std::string_view name) const {
  return std::any_of(registers_.begin(), registers_.end(),
                     [&](const Register& r) { return r.name == name; });
}

std::size_t RegisterLayout::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < registers_.size(); ++i)
    if (registers_[i].name == name) return i;
  throw DimensionError("unknown register '" + std::string(name) + "'");
}

RegisterLayout RegisterLayout::with_dim(std::string_view name, std::size_t dim) const {
  auto regs = registers_;
  regs[index_of(name)].dim = dim;
  return RegisterLayout(std::move(regs));
}

RegisterLayout RegisterLayout::without(std::span<const std::string> names) const {
  for (const auto& n : names) (void)index_of(n);
  std::vector<Register> regs;
  for (const auto& r : registers_)
    if (std::find(names.begin(), names.end(), r.name) == names.end()) regs.push_back(r);
  return RegisterLayout(std::move(regs));
}

RegisterLayout RegisterLayout::appended(Register reg) const {
  auto regs = registers_;
  regs.push_back(std::move(reg));
  return RegisterLayout(std::move(regs));
}

std::vector<std::size_t> RegisterLayout::decompose(std::size_t flat) const {
  std::vector<std::size_t> digits(registers_.size());
  for (std::size_t i = 0; i < registers_.size(); ++i) digits[i] = (flat / strides_[i]) % registers_[i].dim;
  return digits;
}

std::size_t RegisterLayout::compose(std::span<const std::size_t> digits) const {
  if (digits.size() != registers_.size()) throw DimensionError("digit count does not match layout");
  std::size_t flat = 0;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (digits[i] >= registers_[i].dim) throw DimensionError("digit out of range for '" + registers_[i].name + "'");
    flat += digits[i] * strides_[i];
  }
  return flat;
}

// ---------------------------------------------------------------------------
// States

PureState::PureState(RegisterLayout l, Vector amps, bool unnorm)
    : layout(std::move(l)), amplitudes(std::move(amps)), unnormalized(unnorm) {
  if (static_cast<std::size_t>(amplitudes.size()) != layout.total_dim())
    throw DimensionError("amplitude count " + std::to_string(amplitudes.size()) +
                         " does not match layout dimension " + std::to_string(layout.total_dim()));
}

PureState PureState::basis(RegisterLayout l, std::size_t index) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(l.total_dim()));
  if (index >= l.total_dim()) throw DimensionError("basis index out of range");
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return PureState(std::move(l), std::move(v));
}

PureState PureState::basis(RegisterLayout l, std::span<const std::pair<std::string, std::size_t>> digits) {
  std::vector<std::size_t> d(l.size(), 0);
  for (const auto& [name, value] : digits) d[l.index_of(name)] = value;
  const auto flat = l.compose(d);
  return basis(std::move(l), flat);
}

void PureState::validate(double tol) const {
  if (static_cast<std::size_t>(amplitudes.size()) != layout.total_dim())
    throw DimensionError("amplitude count does not match layout");
  if (!unnormalized && std::abs(amplitudes.norm() - 1.0) > tol)
    throw Error("pure state norm " + std::to_string(amplitudes.norm()) + " is not 1");
}

DensityState::DensityState(RegisterLayout l, Matrix rho) : layout(std::move(l)), matrix(std::move(rho)) {
  const auto d = static_cast<Eigen::Index>(layout.total_dim());
  if (matrix.rows() != d || matrix.cols() != d)
    throw DimensionError("density matrix shape does not match layout dimension");
}

DensityState DensityState::from_pure(const PureState& psi) {
  return DensityState(psi.layout, psi.amplitudes * psi.amplitudes.adjoint());
}

void DensityState::validate(double tol) const {
  if (max_abs(matrix - matrix.adjoint()) > tol) throw Error("density matrix is not Hermitian");
  if (std::abs(matrix.trace() - cplx(1.0)) > tol) throw Error("density matrix trace is not 1");
  Eigen::SelfAdjointEigenSolver<Matrix> es(matrix, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol) throw Error("density matrix has a negative eigenvalue");
}

// ---------------------------------------------------------------------------
// Local operator application

namespace {

struct ApplyPlan {
  RegisterLayout out_layout;
  std::vector<std::size_t> in_offsets;
  std::vector<std::size_t> out_offsets;
  std::vector<std::size_t> rest_in;
  std::vector<std::size_t> rest_out;
};

std::vector<std::size_t> offsets_for(const RegisterLayout& layout, std::span<const std::size_t> regs) {
  std::vector<std::size_t> offsets{0};
  for (std::size_t r : regs) {
    std::vector<std::size_t> next;
    next.reserve(offsets.size() * layout[r].dim);
    for (std::size_t base : offsets)
      for (std::size_t v = 0; v < layout[r].dim; ++v) next.push_back(base + v * layout.stride(r));
    offsets = std::move(next);
  }
  return offsets;
}

ApplyPlan make_plan(const RegisterLayout& in, std::span<const std::string> targets,
                    std::span<const std::size_t> out_dims, Eigen::Index op_rows, Eigen::Index op_cols) {
  std::vector<std::size_t> idx;
  for (const auto& t : targets) {
    const auto i = in.index_of(t);
    if (std::find(idx.begin(), idx.end(), i) != idx.end())
      throw DimensionError("register '" + t + "' targeted twice");
    idx.push_back(i);
  }
  if (!out_dims.empty() && out_dims.size() != targets.size())
    throw DimensionError("out_dims must list one dimension per target");

  auto regs = in.registers();
  std::size_t din = 1;
  std::size_t dout = 1;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    din *= regs[idx[k]].dim;
    if (!out_dims.empty()) regs[idx[k]].dim = out_dims[k];
    dout *= regs[idx[k]].dim;
  }
  if (static_cast<std::size_t>(op_cols) != din || static_cast<std::size_t>(op_rows) != dout) {
    std::ostringstream msg;
    msg << "operator is " << op_rows << "x" << op_cols << " but targets need " << dout << "x" << din;
    throw DimensionError(msg.str());
  }

  ApplyPlan plan;
  plan.out_layout = RegisterLayout(std::move(regs));
  plan.in_offsets = offsets_for(in, idx);
  plan.out_offsets = offsets_for(plan.out_layout, idx);

  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < in.size(); ++i)
    if (std::find(idx.begin(), idx.end(), i) == idx.end()) rest.push_back(i);
  plan.rest_in = offsets_for(in, rest);
  plan.rest_out = offsets_for(plan.out_layout, rest);
  return plan;
}

Vector apply_plan(const ApplyPlan& plan, const Matrix& op, const Vector& in) {
  const auto din = static_cast<Eigen::Index>(plan.in_offsets.size());
  const auto nrest = static_cast<Eigen::Index>(plan.rest_in.size());
  Matrix gathered(din, nrest);
  for (Eigen::Index r = 0; r < nrest; ++r)
    for (Eigen::Index j = 0; j < din; ++j)
      gathered(j, r) = in(static_cast<Eigen::Index>(plan.rest_in[r] + plan.in_offsets[j]));
  const Matrix result = op * gathered;
  Vector out = Vector::Zero(static_cast<Eigen::Index>(plan.out_layout.total_dim()));
  for (Eigen::Index r = 0; r < nrest; ++r)
    for (Eigen::Index i = 0; i < result.rows(); ++i)
      out(static_cast<Eigen::Index>(plan.rest_out[r] + plan.out_offsets[i])) = result(i, r);
  return out;
}

bool is_exact_identity(const Matrix& op, std::span<const std::size_t> out_dims, const RegisterLayout& in,
                       std::span<const std::string> targets) {
  if (op.rows() != op.cols()) return false;
  for (std::size_t k = 0; k < out_dims.size(); ++k)
    if (out_dims[k] != in.dim(targets[k])) return false;
  return op == Matrix::Identity(op.rows(), op.cols());
}

const std::string kColumnSuffix = "#col";

// Row-major vectorization of ρ over the doubled layout (row registers, then
// column registers).
RegisterLayout doubled(const RegisterLayout& l) {
  auto regs = l.registers();
  for (const auto& r : l.registers()) regs.push_back({r.name + kColumnSuffix, r.dim});
  return RegisterLayout(std::move(regs));
}

Vector vectorize(const Matrix& rho) {
  const auto d = rho.rows();
  Vector v(d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) v(i * d + j) = rho(i, j);
  return v;
}

Matrix unvectorize(const Vector& v, Eigen::Index d) {
  Matrix rho(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) rho(i, j) = v(i * d + j);
  return rho;
}

RegisterLayout undoubled(const RegisterLayout& dl) {
  std::vector<Register> regs(dl.registers().begin(), dl.registers().begin() + static_cast<long>(dl.size() / 2));
  return RegisterLayout(std::move(regs));
}

// Left-multiply by op and right-multiply by op† on the doubled vector.
Vector sandwich(const RegisterLayout& dl, const Vector& v, const Matrix& op, std::span<const std::string> targets,
                std::span<const std::size_t> out_dims, RegisterLayout& out_dl) {
  std::vector<std::string> col_targets;
  for (const auto& t : targets) col_targets.push_back(t + kColumnSuffix);
  const auto p1 = make_plan(dl, targets, out_dims, op.rows(), op.cols());
  Vector w = apply_plan(p1, op, v);
  const auto p2 = make_plan(p1.out_layout, col_targets, out_dims, op.rows(), op.cols());
  Vector u = apply_plan(p2, op.conjugate(), w);
  out_dl = p2.out_layout;
  return u;
}

}  // namespace

PureState embed_and_apply(const PureState& state, const Matrix& op, std::span<const std::string> targets,
                          std::span<const std::size_t> out_dims) {
  const auto plan = make_plan(state.layout, targets, out_dims, op.rows(), op.cols());
  if (is_exact_identity(op, out_dims, state.layout, targets)) return state;
  return PureState(plan.out_layout, apply_plan(plan, op, state.amplitudes), state.unnormalized);
}

DensityState embed_and_apply(const DensityState& state, const Matrix& op, std::span<const std::string> targets,
                             std::span<const std::size_t> out_dims) {
  (void)make_plan(state.layout, targets, out_dims, op.rows(), op.cols());
  if (is_exact_identity(op, out_dims, state.layout, targets)) return state;
  const auto dl = doubled(state.layout);
  RegisterLayout out_dl;
  const Vector v = sandwich(dl, vectorize(state.matrix), op, targets, out_dims, out_dl);
  auto out_layout = undoubled(out_dl);
  const auto d = static_cast<Eigen::Index>(out_layout.total_dim());
  return DensityState(std::move(out_layout), unvectorize(v, d));
}

// ---------------------------------------------------------------------------
// Channels

namespace {

std::size_t product(std::span<const std::size_t> dims, std::span<const std::size_t> slots) {
  std::size_t p = 1;
  for (auto s : slots) p *= dims[s];
  return p;
}

std::vector<std::string> slot_names(std::size_t count) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < count; ++i) names.push_back("slot" + std::to_string(i));
  return names;
}

RegisterLayout slot_layout(std::span<const std::size_t> dims) {
  std::vector<Register> regs;
  const auto names = slot_names(dims.size());
  for (std::size_t i = 0; i < dims.size(); ++i) regs.push_back({names[i], dims[i]});
  return RegisterLayout(std::move(regs));
}

}  // namespace

Channel Channel::kraus(std::vector<std::size_t> in_dims, std::vector<std::size_t> out_dims,
                       std::vector<KrausOperator> ops) {
  if (in_dims.size() != out_dims.size()) throw DimensionError("channel slot count mismatch");
  for (const auto& k : ops) {
    std::vector<int> covered(in_dims.size(), 0);
    for (const auto& f : k) {
      for (auto s : f.slots) {
        if (s >= in_dims.size()) throw DimensionError("Kraus factor references unknown slot");
        if (++covered[s] > 1) throw DimensionError("Kraus factor slots overlap");
      }
      if (static_cast<std::size_t>(f.op.cols()) != product(in_dims, f.slots) ||
          static_cast<std::size_t>(f.op.rows()) != product(out_dims, f.slots))
        throw DimensionError("Kraus factor shape does not match its slots");
    }
    for (std::size_t s = 0; s < in_dims.size(); ++s)
      if (!covered[s] && in_dims[s] != out_dims[s])
        throw DimensionError("a slot that changes dimension must be covered by every Kraus operator");
  }
  Channel ch;
  ch.in_dims_ = std::move(in_dims);
  ch.out_dims_ = std::move(out_dims);
  ch.ops_ = std::move(ops);
  return ch;
}

Channel Channel::mixture(std::vector<std::pair<double, Channel>> parts) {
  if (parts.empty()) throw Error("empty channel mixture");
  double total = 0.0;
  for (const auto& [w, c] : parts) {
    if (w < 0.0) throw Error("negative mixture weight");
    if (c.in_dims() != parts.front().second.in_dims() || c.out_dims() != parts.front().second.out_dims())
      throw DimensionError("mixture parts have different slot dimensions");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error("mixture weights do not sum to 1");
  Channel ch;
  ch.in_dims_ = parts.front().second.in_dims();
  ch.out_dims_ = parts.front().second.out_dims();
  ch.parts_ = std::move(parts);
  return ch;
}

Channel Channel::identity(std::vector<std::size_t> dims) {
  auto out = dims;
  return kraus(std::move(dims), std::move(out), {KrausOperator{}});
}

Matrix Channel::kraus_matrix(std::size_t k) const {
  if (is_mixture()) throw Error("kraus_matrix called on a mixture");
  const auto layout = slot_layout(in_dims_);
  const auto names = slot_names(in_dims_.size());
  const auto din = static_cast<Eigen::Index>(layout.total_dim());
  const auto dout = static_cast<Eigen::Index>(
      std::accumulate(out_dims_.begin(), out_dims_.end(), std::size_t{1}, std::multiplies<>()));
  Matrix full(dout, din);
  for (Eigen::Index j = 0; j < din; ++j) {
    PureState col = PureState::basis(layout, static_cast<std::size_t>(j));
    for (const auto& f : ops_[k]) {
      std::vector<std::string> tgt;
      std::vector<std::size_t> od;
      for (auto s : f.slots) {
        tgt.push_back(names[s]);
        od.push_back(out_dims_[s]);
      }
      col = embed_and_apply(col, f.op, tgt, od);
    }
    full.col(j) = col.amplitudes;
  }
  return full;
}

double Channel::completeness_residual() const {
  if (is_mixture()) {
    double worst = 0.0;
    for (const auto& [w, c] : parts_) worst = std::max(worst, c.completeness_residual());
    return worst;
  }
  std::size_t din = 1;
  for (auto d : in_dims_) din *= d;
  Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(din), static_cast<Eigen::Index>(din));
  for (std::size_t k = 0; k < ops_.size(); ++k) {
    const Matrix K = kraus_matrix(k);
    sum += K.adjoint() * K;
  }
  return max_abs(sum - Matrix::Identity(sum.rows(), sum.cols()));
}

DensityState Channel::apply(const DensityState& rho, std::span<const std::string> targets) const {
  if (targets.size() != in_dims_.size()) throw DimensionError("channel expects " + std::to_string(in_dims_.size()) +
                                                              " target registers");
  for (std::size_t s = 0; s < targets.size(); ++s)
    if (rho.layout.dim(targets[s]) != in_dims_[s])
      throw DimensionError("register '" + targets[s] + "' has dimension " +
                           std::to_string(rho.layout.dim(targets[s])) + ", channel expects " +
                           std::to_string(in_dims_[s]));

  if (is_mixture()) {
    std::optional<DensityState> acc;
    for (const auto& [w, c] : parts_) {
      if (w == 0.0) continue;
      auto part = c.apply(rho, targets);
      if (!acc) {
        acc = std::move(part);
        acc->matrix *= w;
      } else {
        acc->matrix += w * part.matrix;
      }
    }
    return *acc;
  }

  if (ops_.size() == 1 && ops_.front().empty()) return rho;

  const auto dl = doubled(rho.layout);
  const Vector v = vectorize(rho.matrix);
  std::optional<Vector> acc;
  RegisterLayout out_dl = dl;
  for (const auto& k : ops_) {
    Vector w = v;
    RegisterLayout cur = dl;
    for (const auto& f : k) {
      std::vector<std::string> tgt;
      std::vector<std::size_t> od;
      for (auto s : f.slots) {
        tgt.push_back(targets[s]);
        od.push_back(out_dims_[s]);
      }
      RegisterLayout next;
      w = sandwich(cur, w, f.op, tgt, od, next);
      cur = std::move(next);
    }
    out_dl = cur;
    if (!acc) acc = std::move(w);
    else *acc += w;
  }
  auto out_layout = undoubled(out_dl);
  const auto d = static_cast<Eigen::Index>(out_layout.total_dim());
  return DensityState(std::move(out_layout), unvectorize(*acc, d));
}

DensityState apply_channel(const DensityState& state, const Channel& ch, std::span<const std::string> targets) {
  return ch.apply(state, targets);
}

// ---------------------------------------------------------------------------
// Partial trace

DensityState partial_trace(const DensityState& state, std::span<const std::string> discard) {
  const auto& l = state.layout;
  std::vector<std::size_t> keep_idx;
  std::vector<std::size_t> drop_idx;
  for (const auto& d : discard) (void)l.index_of(d);
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (std::find(discard.begin(), discard.end(), l[i].name) != discard.end()) drop_idx.push_back(i);
    else keep_idx.push_back(i);
  }
  if (drop_idx.empty()) return state;
  const auto keep = offsets_for(l, keep_idx);
  const auto drop = offsets_for(l, drop_idx);
  const auto dk = static_cast<Eigen::Index>(keep.size());
  Matrix out = Matrix::Zero(dk, dk);
  for (Eigen::Index i = 0; i < dk; ++i)
    for (Eigen::Index j = 0; j < dk; ++j) {
      cplx s = 0.0;
      for (auto k : drop)
        s += state.matrix(static_cast<Eigen::Index>(keep[i] + k), static_cast<Eigen::Index>(keep[j] + k));
      out(i, j) = s;
    }
  return DensityState(l.without(discard), std::move(out));
}

DensityState reduced_density(const PureState& state, std::span<const std::string> discard) {
  const auto& l = state.layout;
  std::vector<std::size_t> keep_idx;
  std::vector<std::size_t> drop_idx;
  for (const auto& d : discard) (void)l.index_of(d);
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (std::find(discard.begin(), discard.end(), l[i].name) != discard.end()) drop_idx.push_back(i);
    else keep_idx.push_back(i);
  }
  const auto keep = offsets_for(l, keep_idx);
  const auto drop = offsets_for(l, drop_idx);
  Matrix block(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(drop.size()));
  for (std::size_t i = 0; i < keep.size(); ++i)
    for (std::size_t k = 0; k < drop.size(); ++k)
      block(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          state.amplitudes(static_cast<Eigen::Index>(keep[i] + drop[k]));
  return DensityState(l.without(discard), block * block.adjoint());
}

Matrix choi_matrix(const std::function<DensityState(const DensityState&)>& map, const RegisterLayout& in) {
  const auto d = static_cast<Eigen::Index>(in.total_dim());
  Matrix choi;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      Matrix e = Matrix::Zero(d, d);
      e(i, j) = 1.0;
      const auto out = map(DensityState(in, std::move(e)));
      const auto dout = out.matrix.rows();
      if (choi.size() == 0) choi = Matrix::Zero(d * dout, d * dout);
      choi.block(i * dout, j * dout, dout, dout) = out.matrix;
    }
  return choi;
}

// ---------------------------------------------------------------------------
// Norms

namespace {

template <typename Mat>
double power_iteration(const Mat& m, double tol, std::size_t max_iter) {
  const auto cols = m.cols();
  Rng rng(0x5eed5eedULL);
  std::normal_distribution<double> g;
  Vector v(cols);
  for (Eigen::Index i = 0; i < cols; ++i) v(i) = cplx(1.0 + 0.1 * g(rng), 0.1 * g(rng));
  v.normalize();
  double prev = -1.0;
  double est = 0.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    const Vector mv = m * v;
    est = mv.squaredNorm();
    Vector w = m.adjoint() * mv;
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;
    v = w / wn;
    if (prev >= 0.0 && std::abs(est - prev) <= tol * std::max(est, 1e-300)) break;
    prev = est;
  }
  // One more Rayleigh quotient with the final iterate.
  est = std::max(est, (m * v).squaredNorm());
  return std::sqrt(est);
}

}  // namespace

double operator_norm_power(const SparseMatrix& m, double tol, std::size_t max_iter) {
  if (m.rows() == 0 || m.cols() == 0) throw Error("operator_norm of an empty matrix");
  return power_iteration(m, tol, max_iter);
}

double operator_norm(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) throw Error("operator_norm of an empty matrix");
  if (std::max(m.rows(), m.cols()) <= 4096) {
    Eigen::BDCSVD<Matrix> svd(m);
    return svd.singularValues()(0);
  }
  return power_iteration(m, 1e-13, 200000);
}

double operator_norm(const SparseMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) throw Error("operator_norm of an empty matrix");
  if (std::max(m.rows(), m.cols()) <= 512) return operator_norm(Matrix(m));
  return power_iteration(m, 1e-13, 200000);
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double max_abs(const SparseMatrix& m) {
  double best = 0.0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) best = std::max(best, std::abs(it.value()));
  return best;
}

double unitarity_residual(const Matrix& u) {
  return max_abs(u.adjoint() * u - Matrix::Identity(u.cols(), u.cols()));
}

// ---------------------------------------------------------------------------
// Measurement

std::vector<double> measure_distribution(const PureState& state, std::string_view reg) {
  const auto i = state.layout.index_of(reg);
  const auto d = state.layout[i].dim;
  const auto stride = state.layout.stride(i);
  std::vector<double> probs(d, 0.0);
  for (Eigen::Index k = 0; k < state.amplitudes.size(); ++k)
    probs[(static_cast<std::size_t>(k) / stride) % d] += std::norm(state.amplitudes(k));
  return probs;
}

std::vector<double> measure_distribution(const DensityState& state, std::string_view reg) {
  const auto i = state.layout.index_of(reg);
  const auto d = state.layout[i].dim;
  const auto stride = state.layout.stride(i);
  std::vector<double> probs(d, 0.0);
  for (Eigen::Index k = 0; k < state.matrix.rows(); ++k)
    probs[(static_cast<std::size_t>(k) / stride) % d] += state.matrix(k, k).real();
  return probs;
}

PureState collapse(const PureState& state, std::string_view reg, std::size_t outcome) {
  const auto i = state.layout.index_of(reg);
  const auto d = state.layout[i].dim;
  if (outcome >= d) throw DimensionError("measurement outcome out of range");
  const auto stride = state.layout.stride(i);
  Vector v = state.amplitudes;
  for (Eigen::Index k = 0; k < v.size(); ++k)
    if ((static_cast<std::size_t>(k) / stride) % d != outcome) v(k) = 0.0;
  const double nrm = v.norm();
  if (nrm == 0.0) throw Error("cannot sample outcome " + std::to_string(outcome) + " of '" + std::string(reg) +
                              "': projected branch is zero");
  return PureState(state.layout, v / nrm);
}

Sample measure_sample(const PureState& state, std::string_view reg, Rng& rng) {
  const auto probs = measure_distribution(state, reg);
  std::discrete_distribution<std::size_t> pick(probs.begin(), probs.end());
  const auto outcome = pick(rng);
  return {outcome, collapse(state, reg, outcome)};
}

// ---------------------------------------------------------------------------
// Random objects

Matrix random_unitary(std::size_t dim, Rng& rng) {
  std::normal_distribution<double> g;
  const auto d = static_cast<Eigen::Index>(dim);
  Matrix z(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) z(i, j) = cplx(g(rng), g(rng));
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < d; ++j) {
    const double a = std::abs(r(j, j));
    if (a > 0.0) q.col(j) *= r(j, j) / a;
  }
  return q;
}

Vector random_unit_vector(std::size_t dim, Rng& rng) {
  std::normal_distribution<double> g;
  Vector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = cplx(g(rng), g(rng));
  return v / v.norm();
}

}  // namespace noisyq
