#pragma once

// Brute-force reference constructions used as independent oracles. Nothing
// here calls into the library's projector or extended-oracle code.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

namespace reference {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  while (e--) r *= b;
  return r;
}

// Worst-case extended space F ⊗ Qi ⊗ Qo ⊗ [flag] ⊗ R_1..R_t, no workspace.
// Record symbols: 0 is empty, x+1 is x; R_1 is the most significant digit.
struct WorstCase {
  std::size_t n;

  std::vector<std::size_t> record(std::size_t r, std::size_t t) const {
    std::vector<std::size_t> s(t);
    for (std::size_t i = t; i-- > 0;) {
      s[i] = r % (n + 1);
      r /= n + 1;
    }
    return s;
  }

  std::vector<bool> in_record(std::size_t r, std::size_t t) const {
    std::vector<bool> in(n, false);
    for (auto s : record(r, t))
      if (s) in[s - 1] = true;
    return in;
  }

  // Uniform superposition of |f_z⟩ over z not in the record.
  Vector psi(const std::vector<bool>& in) const {
    Vector v = Vector::Zero(n);
    std::size_t k = 0;
    for (std::size_t z = 0; z < n; ++z) k += !in[z];
    for (std::size_t z = 0; z < n && k; ++z)
      if (!in[z]) v(z) = 1.0 / std::sqrt(double(k));
    return v;
  }

  // Part of |f_x⟩ orthogonal to ψ, normalized; zero when x is recorded or
  // fewer than two candidates remain.
  Vector f_tilde(const std::vector<bool>& in, std::size_t x) const {
    Vector v = Vector::Zero(n);
    std::size_t k = 0;
    for (std::size_t z = 0; z < n; ++z) k += !in[z];
    if (in[x] || k < 2) return v;
    const Vector p = psi(in);
    v(x) = 1.0;
    v -= p * p(x);
    return v / v.norm();
  }

  Matrix outside(const std::vector<bool>& in) const {
    Matrix m = Matrix::Zero(n, n);
    for (std::size_t z = 0; z < n; ++z)
      if (!in[z]) m(z, z) = 1.0;
    return m;
  }

  enum Kind { A, B, C, BAct };

  Matrix block(Kind k, std::size_t r, std::size_t t, std::size_t x) const {
    const auto in = in_record(r, t);
    const Vector p = psi(in);
    const Matrix a = p * p.adjoint();
    switch (k) {
      case A: return a;
      case B: return outside(in) - a;
      case C: return Matrix::Identity(n, n) - outside(in);
      case BAct: {
        const Vector f = f_tilde(in, x);
        return f * f.adjoint();
      }
    }
    return {};
  }

  // Index ((f·n + x)·mid + j)·(n+1)^t + r.
  std::size_t dim(std::size_t mid, std::size_t t) const { return n * n * mid * ipow(n + 1, t); }

  // projector(k, mid, t) · M without forming the projector.
  Matrix apply(Kind k, std::size_t mid, std::size_t t, const Matrix& M) const {
    const auto rd = ipow(n + 1, t);
    Matrix out = Matrix::Zero(M.rows(), M.cols());
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t j = 0; j < mid; ++j)
        for (std::size_t r = 0; r < rd; ++r) {
          const Matrix b = block(k, r, t, x);
          for (std::size_t f = 0; f < n; ++f)
            for (std::size_t g = 0; g < n; ++g)
              if (b(f, g) != 0.0)
                out.row(((f * n + x) * mid + j) * rd + r) += b(f, g) * M.row(((g * n + x) * mid + j) * rd + r);
        }
    return out;
  }

  // O_Q (classical = false) or O_C (classical = true): input mid = 2 (Qo),
  // output mid = 4 (Qo, flag). Flag 0 marks the error-free branch.
  Matrix oracle(bool classical, std::size_t t) const {
    const auto rd = ipow(n + 1, t);
    Matrix O = Matrix::Zero(dim(4, t + 1), dim(2, t));
    for (std::size_t f = 0; f < n; ++f)
      for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < 2; ++y)
          for (std::size_t r = 0; r < rd; ++r) {
            const std::size_t y2 = y ^ (f == x ? 1 : 0);
            const std::size_t flag = classical ? 1 : 0;
            const std::size_t sym = classical ? x + 1 : 0;
            O(((f * n + x) * 4 + y2 * 2 + flag) * rd * (n + 1) + r * (n + 1) + sym, ((f * n + x) * 2 + y) * rd + r) = 1.0;
          }
    return O;
  }

  static double norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    const Matrix g = m.cols() <= m.rows() ? Matrix(m.adjoint() * m) : Matrix(m * m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(g);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
  }
};

// P[Bin(k, q) <= threshold] summed in log space.
inline double binomial_cdf(std::size_t k, double q, std::size_t threshold) {
  double total = 0.0;
  for (std::size_t i = 0; i <= threshold && i <= k; ++i) {
    const double lg = std::lgamma(double(k) + 1) - std::lgamma(double(i) + 1) - std::lgamma(double(k - i) + 1) +
                      double(i) * std::log(q) + double(k - i) * std::log1p(-q);
    total += std::exp(lg);
  }
  return total;
}

// sin²((2t+1)·asin√(k/n)) in long double.
inline long double grover_closed_form(std::size_t n, std::size_t k, std::size_t t) {
  const long double th = std::asin(std::sqrt(static_cast<long double>(k) / static_cast<long double>(n)));
  const long double s = std::sin(static_cast<long double>(2 * t + 1) * th);
  return s * s;
}

}  // namespace reference
