#pragma once

// Generating-function operator Psi(xi, t): the master equation with jump terms
// weighted by exp(-xi * Delta s). At xi = 1 it is the Heisenberg-type dual evolution,
// and the sum over any complete set of initial projectors stays at the identity.

#include <string>
#include <vector>

#include "qfluct/dynamics.hpp"

namespace qfluct {

struct TiltedState {
  double xi = 0.0;
  double t = 0.0;
  Operator op;
  std::string initial_tag;
};

struct TiltedSeries {
  double xi = 0.0;
  std::string initial_tag;
  std::vector<double> times;
  std::vector<Operator> psi;

  TiltedState at(std::size_t k) const { return {xi, times[k], psi[k], initial_tag}; }
};

/// -i[H,X] + sum gamma (exp(-xi ds) L X L^dagger - {L^dagger L, X}/2).
/// Throws when xi != 0 and an active channel lacks a reverse.
Operator tilted_generator(const LindbladModel& model, const Operator& x, double xi, double t);
Operator tilted_generator(const LindbladModel& model, const ModelSnapshot& at, const Operator& x, double xi);

/// RK4 on the tilted generator. No trace renormalization.
TiltedSeries evolve_tilted(const LindbladModel& model, const Operator& x0, double xi, const TimeGrid& grid,
                           std::string initial_tag = {});

/// Sum over a complete initial basis of Psi^(1)(t | Pi_b).
struct PsiBarSeries {
  std::vector<double> times;
  std::vector<Operator> psi_bar;
  /// Tr Psi^(1)(t | Pi_b) for each basis vector b, per output time.
  std::vector<std::vector<double>> traces;
};

/// `basis` holds orthonormal initial vectors as columns (identity = jump basis).
PsiBarSeries psi_bar_series(const LindbladModel& model, const Operator& basis, const TimeGrid& grid);

struct PsiBarReport {
  std::vector<double> times;
  std::vector<double> deviation;  // max-norm |Psi_bar - 1| per output time
  std::vector<double> trace_sum;  // sum_b Tr Psi^(1)(t | Pi_b), should equal d
  double max_deviation = 0.0;
};

PsiBarReport psi_bar_one(const LindbladModel& model, const TimeGrid& grid);
PsiBarReport psi_bar_one(const LindbladModel& model, const Operator& basis, const TimeGrid& grid);

/// Tr[sum_b p_b Psi^(1)(t|Pi_b) p_b^{-1} rho_f] over the eigenbasis of rho0, at the final grid time.
/// The product p_b * p_b^{-1} is taken as 1, so null eigenvectors contribute with weight 1.
double ft_functional(const LindbladModel& model, const DensityMatrix& rho0, const DensityMatrix& rho_f,
                     const TimeGrid& grid);

/// Same functional at every output time with a time-dependent final state (one per output time).
std::vector<double> ft_functional_series(const LindbladModel& model, const DensityMatrix& rho0,
                                         const std::vector<Operator>& rho_f, const TimeGrid& grid);

struct JarzynskiExact {
  std::vector<double> times;
  std::vector<double> lhs;  // initial projections in the eigenbasis of rho0 = Gibbs(H(0))
  std::vector<double> rhs;  // Z_t / Z_0 from the spectra of H(0), H(t)
  /// Same weights written with jump-basis projections and diagonal energies H_jj(0).
  /// Equal to lhs only when H(0) is diagonal in the jump basis.
  std::vector<double> lhs_jump_basis;
};

/// Requires every bath at the same beta.
JarzynskiExact jarzynski_lhs(const LindbladModel& model, double beta, const TimeGrid& grid);

/// Tr Psi(xi, t | rho0) at each output time.
std::vector<double> generating_function(const LindbladModel& model, const DensityMatrix& rho0, double xi,
                                        const TimeGrid& grid);

/// <Delta S_B>(t) = -d/dxi log Tr Psi(xi, t | rho0) at xi = 0, by central differences.
std::vector<double> mean_bath_entropy(const LindbladModel& model, const DensityMatrix& rho0, const TimeGrid& grid,
                                      double step = 1e-5);

}  // namespace qfluct
