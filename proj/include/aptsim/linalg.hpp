#pragma once

// Fixed-size complex 2x2 linear algebra.
//
// Everything downstream (Hamiltonians, propagators, density matrices and
// symmetry operators) is carried by ComplexMat2. Two independent matrix
// exponentials are provided: a closed form based on the Cayley-Hamilton
// identity for traceless 2x2 matrices, and a scaling-and-squaring Taylor
// series used as an oracle.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <utility>

namespace aptsim {

using cplx = std::complex<double>;

inline constexpr cplx kI{0.0, 1.0};

/// Pauli-basis coefficients: M = c0*I + cx*sx + cy*sy + cz*sz.
struct PauliCoeffs {
  cplx c0{}, cx{}, cy{}, cz{};
};

/// Row-major complex 2x2 matrix with value semantics.
class ComplexMat2 {
 public:
  constexpr ComplexMat2() = default;
  constexpr ComplexMat2(cplx a00, cplx a01, cplx a10, cplx a11)
      : a_{a00, a01, a10, a11} {}

  static constexpr ComplexMat2 zero() { return {}; }
  static constexpr ComplexMat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static constexpr ComplexMat2 diag(cplx d0, cplx d1) { return {d0, 0.0, 0.0, d1}; }

  // Pauli matrices and spin-1/2 angular momentum operators I_a = s_a / 2.
  static constexpr ComplexMat2 sigma_x() { return {0.0, 1.0, 1.0, 0.0}; }
  static constexpr ComplexMat2 sigma_y() { return {0.0, -kI, kI, 0.0}; }
  static constexpr ComplexMat2 sigma_z() { return {1.0, 0.0, 0.0, -1.0}; }
  static constexpr ComplexMat2 spin_x() { return {0.0, 0.5, 0.5, 0.0}; }
  static constexpr ComplexMat2 spin_y() { return {0.0, -0.5 * kI, 0.5 * kI, 0.0}; }
  static constexpr ComplexMat2 spin_z() { return {0.5, 0.0, 0.0, -0.5}; }

  static constexpr ComplexMat2 from_pauli(const PauliCoeffs& c) {
    return {c.c0 + c.cz, c.cx - kI * c.cy, c.cx + kI * c.cy, c.c0 - c.cz};
  }

  constexpr PauliCoeffs to_pauli() const {
    return {0.5 * (a_[0] + a_[3]), 0.5 * (a_[1] + a_[2]),
            0.5 * kI * (a_[1] - a_[2]), 0.5 * (a_[0] - a_[3])};
  }

  constexpr cplx operator()(std::size_t r, std::size_t c) const { return a_[2 * r + c]; }
  constexpr cplx& operator()(std::size_t r, std::size_t c) { return a_[2 * r + c]; }

  constexpr const std::array<cplx, 4>& entries() const { return a_; }

  constexpr cplx trace() const { return a_[0] + a_[3]; }
  constexpr cplx det() const { return a_[0] * a_[3] - a_[1] * a_[2]; }

  constexpr ComplexMat2 transpose() const { return {a_[0], a_[2], a_[1], a_[3]}; }
  ComplexMat2 conj() const {
    return {std::conj(a_[0]), std::conj(a_[1]), std::conj(a_[2]), std::conj(a_[3])};
  }
  ComplexMat2 adjoint() const { return conj().transpose(); }

  /// Max absolute entry.
  double norm() const {
    double m = 0.0;
    for (const auto& z : a_) m = std::max(m, std::abs(z));
    return m;
  }

  bool is_finite() const {
    return std::all_of(a_.begin(), a_.end(), [](const cplx& z) {
      return std::isfinite(z.real()) && std::isfinite(z.imag());
    });
  }

  constexpr ComplexMat2& operator+=(const ComplexMat2& o) {
    for (std::size_t i = 0; i < 4; ++i) a_[i] += o.a_[i];
    return *this;
  }
  constexpr ComplexMat2& operator-=(const ComplexMat2& o) {
    for (std::size_t i = 0; i < 4; ++i) a_[i] -= o.a_[i];
    return *this;
  }
  constexpr ComplexMat2& operator*=(cplx s) {
    for (auto& z : a_) z *= s;
    return *this;
  }

  friend constexpr ComplexMat2 operator+(ComplexMat2 a, const ComplexMat2& b) { return a += b; }
  friend constexpr ComplexMat2 operator-(ComplexMat2 a, const ComplexMat2& b) { return a -= b; }
  friend constexpr ComplexMat2 operator-(ComplexMat2 a) { return a *= -1.0; }
  friend constexpr ComplexMat2 operator*(ComplexMat2 a, cplx s) { return a *= s; }
  friend constexpr ComplexMat2 operator*(cplx s, ComplexMat2 a) { return a *= s; }
  friend constexpr ComplexMat2 operator*(ComplexMat2 a, double s) { return a *= cplx{s}; }
  friend constexpr ComplexMat2 operator*(double s, ComplexMat2 a) { return a *= cplx{s}; }

  friend constexpr ComplexMat2 operator*(const ComplexMat2& x, const ComplexMat2& y) {
    return {x.a_[0] * y.a_[0] + x.a_[1] * y.a_[2], x.a_[0] * y.a_[1] + x.a_[1] * y.a_[3],
            x.a_[2] * y.a_[0] + x.a_[3] * y.a_[2], x.a_[2] * y.a_[1] + x.a_[3] * y.a_[3]};
  }

  friend constexpr bool operator==(const ComplexMat2&, const ComplexMat2&) = default;

 private:
  std::array<cplx, 4> a_{};
};

inline double distance(const ComplexMat2& a, const ComplexMat2& b) { return (a - b).norm(); }

inline ComplexMat2 commutator(const ComplexMat2& a, const ComplexMat2& b) { return a * b - b * a; }

/// Two complex amplitudes; may be sub-normalized after dissipative evolution.
struct QubitState {
  cplx amp0{};
  cplx amp1{};

  static constexpr QubitState ground() { return {1.0, 0.0}; }
  static constexpr QubitState excited() { return {0.0, 1.0}; }

  double norm2() const { return std::norm(amp0) + std::norm(amp1); }
  double norm() const { return std::sqrt(norm2()); }

  QubitState operator*(cplx s) const { return {amp0 * s, amp1 * s}; }
  QubitState operator+(const QubitState& o) const { return {amp0 + o.amp0, amp1 + o.amp1}; }
  QubitState operator-(const QubitState& o) const { return {amp0 - o.amp0, amp1 - o.amp1}; }

  friend bool operator==(const QubitState&, const QubitState&) = default;
};

inline QubitState operator*(const ComplexMat2& m, const QubitState& v) {
  return {m(0, 0) * v.amp0 + m(0, 1) * v.amp1, m(1, 0) * v.amp0 + m(1, 1) * v.amp1};
}

/// Dirac inner product <a|b>, antilinear in a.
inline cplx dot(const QubitState& a, const QubitState& b) {
  return std::conj(a.amp0) * b.amp0 + std::conj(a.amp1) * b.amp1;
}

/// Outer product |a><b|.
inline ComplexMat2 outer(const QubitState& a, const QubitState& b) {
  return {a.amp0 * std::conj(b.amp0), a.amp0 * std::conj(b.amp1), a.amp1 * std::conj(b.amp0),
          a.amp1 * std::conj(b.amp1)};
}

inline QubitState normalized(const QubitState& v) { return v * cplx{1.0 / v.norm()}; }

// ---------------------------------------------------------------------------
// Matrix exponential

/// Closed-form e^M. With t = tr(M)/2 and N = M - t*I traceless, N^2 = s^2*I so
/// e^M = e^t [cosh(s) I + sinh(s)/s N]. Both cosh(s) and sinh(s)/s are even in
/// s, so the branch of the square root does not matter.
inline ComplexMat2 expm_closed(const ComplexMat2& m) {
  const cplx t = 0.5 * m.trace();
  const ComplexMat2 n = m - ComplexMat2::identity() * t;
  const cplx s2 = n(0, 0) * n(0, 0) + n(0, 1) * n(1, 0);
  const cplx s = std::sqrt(s2);

  cplx ch, shc;  // cosh(s), sinh(s)/s
  if (std::abs(s.real()) > 20.0) {
    // Fold e^t into the exponentials so that e^{t+s} does not overflow
    // as e^t * cosh(s) would.
    const cplx up = std::exp(t + s);
    const cplx down = std::exp(t - s);
    return ComplexMat2::identity() * (0.5 * (up + down)) + n * (0.5 * (up - down) / s);
  }
  if (std::abs(s) <= 1e-6) {
    ch = 1.0 + s2 / 2.0 + s2 * s2 / 24.0;
    shc = 1.0 + s2 / 6.0 + s2 * s2 / 120.0;
  } else {
    ch = std::cosh(s);
    shc = std::sinh(s) / s;
  }
  return (ComplexMat2::identity() * ch + n * shc) * std::exp(t);
}

/// Scaling-and-squaring Taylor series; independent of expm_closed.
inline ComplexMat2 expm_series(const ComplexMat2& m) {
  int k = 0;
  const double nrm = m.norm();
  if (nrm > 0.5) k = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
  const ComplexMat2 scaled = m * std::ldexp(1.0, -k);

  ComplexMat2 sum = ComplexMat2::identity();
  ComplexMat2 term = ComplexMat2::identity();
  for (int j = 1; j < 64; ++j) {
    term = term * scaled * (1.0 / j);
    sum += term;
    if (term.norm() < 1e-18) break;
  }
  for (int i = 0; i < k; ++i) sum = sum * sum;
  return sum;
}

// ---------------------------------------------------------------------------
// Eigendecomposition

inline constexpr double kDefaultDegenerateTol = 1e-9;

struct EigenPair2 {
  cplx eigenvalue1{};
  cplx eigenvalue2{};
  QubitState eigvec1{};
  QubitState eigvec2{};
  bool degenerate{false};
  double condition{1.0};  // 2-norm condition number of [v1 v2]
};

namespace detail {

// Unit eigenvector of m for eigenvalue lambda. Picks whichever row of
// (m - lambda I) gives the better-conditioned null vector.
inline QubitState null_vector(const ComplexMat2& m, cplx lambda) {
  const QubitState from_row0{m(0, 1), lambda - m(0, 0)};
  const QubitState from_row1{lambda - m(1, 1), m(1, 0)};
  const QubitState& v = from_row0.norm2() >= from_row1.norm2() ? from_row0 : from_row1;
  if (v.norm2() == 0.0) return QubitState::ground();
  return normalized(v);
}

inline double condition_of(const QubitState& v1, const QubitState& v2) {
  // Singular values of V = [v1 v2] from the eigenvalues of the Hermitian V^H V.
  const double a = v1.norm2();
  const double d = v2.norm2();
  const double b = std::abs(dot(v1, v2));
  const double mean = 0.5 * (a + d);
  const double rad = std::sqrt(0.25 * (a - d) * (a - d) + b * b);
  const double smin2 = std::max(mean - rad, 0.0);
  if (smin2 == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt((mean + rad) / smin2);
}

}  // namespace detail

/// Eigenvalues tr/2 +- sqrt((tr/2)^2 - det) on the principal branch.
/// eigenvalue1 takes the + sign.
inline EigenPair2 eig2(const ComplexMat2& m, double tol_degen = kDefaultDegenerateTol) {
  const cplx half_tr = 0.5 * m.trace();
  const cplx n00 = m(0, 0) - half_tr;
  const cplx disc = std::sqrt(n00 * n00 + m(0, 1) * m(1, 0));

  EigenPair2 out;
  out.eigenvalue1 = half_tr + disc;
  out.eigenvalue2 = half_tr - disc;
  out.degenerate =
      std::abs(out.eigenvalue1 - out.eigenvalue2) <= tol_degen * std::max(m.norm(), 1.0);

  if (out.degenerate) {
    out.eigenvalue1 = out.eigenvalue2 = half_tr;
    out.eigvec1 = out.eigvec2 = detail::null_vector(m, half_tr);
    const bool scalar = std::abs(m(0, 1)) + std::abs(m(1, 0)) + std::abs(n00) == 0.0;
    if (scalar) {
      out.eigvec1 = QubitState::ground();
      out.eigvec2 = QubitState::excited();
    }
  } else {
    out.eigvec1 = detail::null_vector(m, out.eigenvalue1);
    out.eigvec2 = detail::null_vector(m, out.eigenvalue2);
  }
  out.condition = detail::condition_of(out.eigvec1, out.eigvec2);
  return out;
}

/// Eigen-decomposition of a Hermitian 2x2 matrix: real eigenvalues in
/// ascending order with orthonormal eigenvectors.
struct HermitianEigen2 {
  std::array<double, 2> values{};
  std::array<QubitState, 2> vectors{};
};

inline HermitianEigen2 eig_hermitian(const ComplexMat2& h) {
  const double a = h(0, 0).real();
  const double d = h(1, 1).real();
  const cplx b = h(0, 1);
  const double mean = 0.5 * (a + d);
  const double rad = std::hypot(0.5 * (a - d), std::abs(b));

  HermitianEigen2 out;
  out.values = {mean - rad, mean + rad};
  if (std::abs(b) == 0.0) {
    if (a <= d) {
      out.vectors = {QubitState::ground(), QubitState::excited()};
    } else {
      out.vectors = {QubitState::excited(), QubitState::ground()};
    }
    return out;
  }
  for (std::size_t i = 0; i < 2; ++i) {
    const double lambda = out.values[i];
    // (a - lambda) x + b y = 0, choose the larger of the two candidate rows.
    QubitState v{b, lambda - a};
    const QubitState w{lambda - d, std::conj(b)};
    if (w.norm2() > v.norm2()) v = w;
    out.vectors[i] = normalized(v);
  }
  return out;
}

}  // namespace aptsim
