#pragma once

// Dense linear algebra over small Hilbert spaces.

#include <complex>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qfluct {

using Complex = std::complex<double>;
using Operator = Eigen::MatrixXcd;
using Ket = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr Complex kI{0.0, 1.0};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Numerical acceptance thresholds for the structural invariants of states.
struct Tolerances {
  double hermiticity = 1e-9;
  double trace = 1e-8;
  double min_eigenvalue = -1e-7;
  double ket_norm = 1e-9;
  double eigh_input = 1e-8;
};

/// Largest absolute entry.
double max_norm(const Operator& x);

/// max |X - X^dagger| entrywise.
double hermiticity_error(const Operator& x);

inline bool is_hermitian(const Operator& x, double tol = 1e-9) { return hermiticity_error(x) <= tol; }

/// Ascending eigenvalues and orthonormal eigenvectors (columns).
struct EigenSystem {
  Eigen::VectorXd values;
  Operator vectors;
};

/// Hermitian eigendecomposition. Throws Error when |X - X^dagger| exceeds tol.
EigenSystem eigh(const Operator& x, double tol = 1e-8);

/// V f(lambda) V^dagger for Hermitian X.
template <class F>
Operator hermitian_function(const Operator& x, F&& f) {
  const EigenSystem es = eigh(x);
  Eigen::VectorXcd fl(es.values.size());
  for (Index k = 0; k < es.values.size(); ++k) fl(k) = Complex(f(es.values(k)), 0.0);
  return es.vectors * fl.asDiagonal() * es.vectors.adjoint();
}

/// Kronecker product, left factor is the slow index.
Operator tensor(const Operator& a, const Operator& b);

Operator identity(Index d);
Ket basis_ket(Index d, Index j);
Operator projector(const Ket& v);
Operator projector(Index d, Index j);

/// Diagonal part in the computational (jump) basis.
Operator diagonal_part(const Operator& x);

namespace pauli {
Operator x();
Operator y();
Operator z();
/// |down><up| with basis order {up, down}.
Operator lowering();
}  // namespace pauli

/// Hermitian, unit-trace, positive semidefinite operator (within Tolerances).
class DensityMatrix {
 public:
  /// Validates the invariants; throws Error naming the violated one.
  static DensityMatrix from_operator(Operator rho, const Tolerances& tol = {});
  static DensityMatrix pure(const Ket& psi);
  static DensityMatrix diagonal(std::span<const double> weights);
  static DensityMatrix maximally_mixed(Index d);
  /// exp(-beta H) / Tr exp(-beta H).
  static DensityMatrix gibbs(const Operator& h, double beta);

  const Operator& matrix() const { return rho_; }
  Index dim() const { return rho_.rows(); }

 private:
  explicit DensityMatrix(Operator rho) : rho_(std::move(rho)) {}
  Operator rho_;
};

/// <psi|X|psi>; psi is not renormalized.
Complex expectation(const Operator& x, const Ket& psi);
/// Tr[X rho].
Complex expectation(const Operator& x, const DensityMatrix& rho);

Ket normalized(const Ket& psi);

}  // namespace qfluct
