#pragma once

// Dense complex linear algebra over multi-register quantum systems.
//
// Basis labels are flattened row-major over the layout's register order: the
// first register is the most significant digit.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace noisyq {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx>;
using Rng = std::mt19937_64;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class CapExceededError : public Error {
 public:
  using Error::Error;
};

struct Register {
  std::string name;
  std::size_t dim = 1;

  friend bool operator==(const Register&, const Register&) = default;
};

class RegisterLayout {
 public:
  RegisterLayout() = default;
  explicit RegisterLayout(std::vector<Register> registers);

  std::size_t total_dim() const { return total_; }
  std::size_t size() const { return registers_.size(); }
  const Register& operator[](std::size_t i) const { return registers_[i]; }
  const std::vector<Register>& registers() const { return registers_; }

  bool contains(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;
  std::size_t dim(std::string_view name) const { return registers_[index_of(name)].dim; }
  // Distance in the flat index between consecutive values of register i.
  std::size_t stride(std::size_t i) const { return strides_[i]; }

  RegisterLayout with_dim(std::string_view name, std::size_t dim) const;
  RegisterLayout without(std::span<const std::string> names) const;
  RegisterLayout appended(Register reg) const;

  std::vector<std::size_t> decompose(std::size_t flat) const;
  std::size_t compose(std::span<const std::size_t> digits) const;

  friend bool operator==(const RegisterLayout& a, const RegisterLayout& b) {
    return a.registers_ == b.registers_;
  }

 private:
  std::vector<Register> registers_;
  std::vector<std::size_t> strides_;
  std::size_t total_ = 1;
};

struct PureState {
  RegisterLayout layout;
  Vector amplitudes;
  // Set on projected branches that are deliberately sub-normalized.
  bool unnormalized = false;

  PureState() = default;
  PureState(RegisterLayout l, Vector amps, bool unnorm = false);

  static PureState basis(RegisterLayout l, std::size_t index);
  // Product of per-register basis states, given as (name, value) in any order.
  static PureState basis(RegisterLayout l, std::span<const std::pair<std::string, std::size_t>> digits);

  double norm() const { return amplitudes.norm(); }
  void validate(double tol = 1e-10) const;
};

struct DensityState {
  RegisterLayout layout;
  Matrix matrix;

  DensityState() = default;
  DensityState(RegisterLayout l, Matrix rho);

  static DensityState from_pure(const PureState& psi);
  void validate(double tol = 1e-10) const;
};

// Operator acting on a list of target registers. The matrix maps the tensor
// product of the targets (in the listed order) to itself, except that
// out_dims may enlarge target registers (isometries). Empty out_dims means
// dimensions are unchanged.
struct LocalOp {
  std::vector<std::string> targets;
  Matrix op;
  std::vector<std::size_t> out_dims;
};

PureState embed_and_apply(const PureState& state, const Matrix& op,
                          std::span<const std::string> targets,
                          std::span<const std::size_t> out_dims = {});
DensityState embed_and_apply(const DensityState& state, const Matrix& op,
                             std::span<const std::string> targets,
                             std::span<const std::size_t> out_dims = {});

// One Kraus operator, given as a product of factors over channel slots.
struct KrausFactor {
  std::vector<std::size_t> slots;
  Matrix op;
};
using KrausOperator = std::vector<KrausFactor>;

// A CPTP map over an ordered list of slots bound to registers at application
// time. Either a list of Kraus operators or a weighted mixture of channels
// with identical slot dimensions.
class Channel {
 public:
  static Channel kraus(std::vector<std::size_t> in_dims, std::vector<std::size_t> out_dims,
                       std::vector<KrausOperator> ops);
  static Channel mixture(std::vector<std::pair<double, Channel>> parts);
  static Channel identity(std::vector<std::size_t> dims);

  const std::vector<std::size_t>& in_dims() const { return in_dims_; }
  const std::vector<std::size_t>& out_dims() const { return out_dims_; }
  bool is_mixture() const { return !parts_.empty(); }

  // ‖Σ K†K − I‖_max over the slot space; mixtures report the worst part.
  double completeness_residual() const;
  // Full matrix of one Kraus operator on the slot space.
  Matrix kraus_matrix(std::size_t k) const;
  std::size_t kraus_count() const { return ops_.size(); }

  DensityState apply(const DensityState& rho, std::span<const std::string> targets) const;

 private:
  std::vector<std::size_t> in_dims_;
  std::vector<std::size_t> out_dims_;
  std::vector<KrausOperator> ops_;
  std::vector<std::pair<double, Channel>> parts_;
};

DensityState apply_channel(const DensityState& state, const Channel& ch,
                           std::span<const std::string> targets);

DensityState partial_trace(const DensityState& state, std::span<const std::string> discard);
// Reduced state of a pure state without forming the full density matrix.
DensityState reduced_density(const PureState& state, std::span<const std::string> discard);

// Choi matrix Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|) of a linear map on states of `in`.
Matrix choi_matrix(const std::function<DensityState(const DensityState&)>& map, const RegisterLayout& in);

// Largest singular value. Dense SVD up to dimension 4096, power iteration on
// M†M beyond that.
double operator_norm(const Matrix& m);
double operator_norm(const SparseMatrix& m);
// Power iteration on M†M, exposed for cross-checks against the SVD path.
double operator_norm_power(const SparseMatrix& m, double tol = 1e-13,
                           std::size_t max_iter = 200000);

// Probability of each value of `reg`.
std::vector<double> measure_distribution(const PureState& state, std::string_view reg);
std::vector<double> measure_distribution(const DensityState& state, std::string_view reg);

// Normalized projection onto reg = outcome. Throws if that branch is empty.
PureState collapse(const PureState& state, std::string_view reg, std::size_t outcome);

struct Sample {
  std::size_t outcome;
  PureState post_state;
};
Sample measure_sample(const PureState& state, std::string_view reg, Rng& rng);

// Haar-like random objects from complex Gaussian draws.
Matrix random_unitary(std::size_t dim, Rng& rng);
Vector random_unit_vector(std::size_t dim, Rng& rng);

double max_abs(const Matrix& m);
double max_abs(const SparseMatrix& m);
double unitarity_residual(const Matrix& u);

}  // namespace noisyq
