#include "qfluct/hilbert.hpp"

#include <cmath>
#include <string>

namespace qfluct {

namespace {

void require_square(const Operator& x, const char* what) {
  if (x.rows() != x.cols() || x.rows() < 1) {
    throw DimensionError(std::string(what) + ": operator must be square with dim >= 1");
  }
}

}  // namespace

double max_norm(const Operator& x) { return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff(); }

double hermiticity_error(const Operator& x) {
  require_square(x, "hermiticity_error");
  return (x - x.adjoint()).cwiseAbs().maxCoeff();
}

EigenSystem eigh(const Operator& x, double tol) {
  require_square(x, "eigh");
  const double err = hermiticity_error(x);
  if (!(err <= tol)) {
    throw Error("eigh: input is not Hermitian (deviation " + std::to_string(err) + ")");
  }
  // Symmetrize so round-off in the input never leaks into the spectrum.
  const Operator sym = 0.5 * (x + x.adjoint());
  Eigen::SelfAdjointEigenSolver<Operator> solver(sym);
  if (solver.info() != Eigen::Success) throw Error("eigh: eigensolver failed to converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Operator tensor(const Operator& a, const Operator& b) {
  require_square(a, "tensor");
  require_square(b, "tensor");
  const Index da = a.rows();
  const Index db = b.rows();
  Operator out(da * db, da * db);
  for (Index i = 0; i < da; ++i) {
    for (Index j = 0; j < da; ++j) out.block(i * db, j * db, db, db) = a(i, j) * b;
  }
  return out;
}

Operator identity(Index d) { return Operator::Identity(d, d); }

Ket basis_ket(Index d, Index j) {
  if (j < 0 || j >= d) throw DimensionError("basis_ket: index out of range");
  Ket v = Ket::Zero(d);
  v(j) = 1.0;
  return v;
}

Operator projector(const Ket& v) { return v * v.adjoint(); }

Operator projector(Index d, Index j) { return projector(basis_ket(d, j)); }

Operator diagonal_part(const Operator& x) {
  require_square(x, "diagonal_part");
  return x.diagonal().asDiagonal();
}

namespace pauli {

Operator x() {
  Operator m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Operator y() {
  Operator m(2, 2);
  m << 0, -kI, kI, 0;
  return m;
}

Operator z() {
  Operator m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Operator lowering() {
  Operator m = Operator::Zero(2, 2);
  m(1, 0) = 1.0;
  return m;
}

}  // namespace pauli

DensityMatrix DensityMatrix::from_operator(Operator rho, const Tolerances& tol) {
  require_square(rho, "DensityMatrix");
  if (!rho.allFinite()) throw Error("DensityMatrix: non-finite entries");
  const double herm = hermiticity_error(rho);
  if (herm > tol.hermiticity) {
    throw Error("DensityMatrix: not Hermitian (deviation " + std::to_string(herm) + ")");
  }
  const double tr_err = std::abs(rho.trace() - Complex(1.0, 0.0));
  if (tr_err > tol.trace) {
    throw Error("DensityMatrix: trace differs from 1 by " + std::to_string(tr_err));
  }
  const EigenSystem es = eigh(rho, tol.hermiticity);
  if (es.values(0) < tol.min_eigenvalue) {
    throw Error("DensityMatrix: negative eigenvalue " + std::to_string(es.values(0)));
  }
  return DensityMatrix(std::move(rho));
}

DensityMatrix DensityMatrix::pure(const Ket& psi) {
  const double n = psi.norm();
  if (n == 0.0) throw Error("DensityMatrix::pure: zero vector");
  return DensityMatrix(projector(psi / n));
}

DensityMatrix DensityMatrix::diagonal(std::span<const double> weights) {
  Operator rho = Operator::Zero(static_cast<Index>(weights.size()), static_cast<Index>(weights.size()));
  for (std::size_t k = 0; k < weights.size(); ++k) rho(static_cast<Index>(k), static_cast<Index>(k)) = weights[k];
  return from_operator(std::move(rho));
}

DensityMatrix DensityMatrix::maximally_mixed(Index d) {
  return DensityMatrix(identity(d) / static_cast<double>(d));
}

DensityMatrix DensityMatrix::gibbs(const Operator& h, double beta) {
  const EigenSystem es = eigh(h);
  const double e0 = es.values(0);
  Eigen::VectorXcd w(es.values.size());
  double z = 0.0;
  for (Index k = 0; k < w.size(); ++k) {
    const double b = std::exp(-beta * (es.values(k) - e0));
    w(k) = b;
    z += b;
  }
  Operator rho = es.vectors * (w / z).asDiagonal() * es.vectors.adjoint();
  rho = 0.5 * (rho + rho.adjoint());
  return from_operator(std::move(rho));
}

Complex expectation(const Operator& x, const Ket& psi) {
  if (x.rows() != psi.size() || x.cols() != psi.size()) throw DimensionError("expectation: dimension mismatch");
  return psi.dot(x * psi);
}

Complex expectation(const Operator& x, const DensityMatrix& rho) {
  if (x.rows() != rho.dim() || x.cols() != rho.dim()) throw DimensionError("expectation: dimension mismatch");
  return (x * rho.matrix()).trace();
}

Ket normalized(const Ket& psi) {
  const double n = psi.norm();
  if (n == 0.0) throw Error("normalized: zero vector");
  return psi / n;
}

}  // namespace qfluct
