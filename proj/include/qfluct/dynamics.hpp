#pragma once

// Deterministic integration of the master equation, diagonal heat and entropies.

#include <cstddef>
#include <vector>

#include "qfluct/hilbert.hpp"
#include "qfluct/model.hpp"

namespace qfluct {

class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// Uniform grid t_k = k dt, k = 0..steps; output every `stride` steps (the last step is always kept).
struct TimeGrid {
  double dt = 1e-3;
  std::size_t steps = 0;
  std::size_t stride = 1;

  /// Grid covering [0, t_final]; t_final / dt must be an integer to 1e-9.
  static TimeGrid covering(double t_final, double dt, std::size_t stride = 1);

  double time(std::size_t k) const { return static_cast<double>(k) * dt; }
  double t_final() const { return time(steps); }
  bool is_output(std::size_t k) const { return k % stride == 0 || k == steps; }
  /// Step indices of the output points, in order.
  std::vector<std::size_t> output_steps() const;
  std::vector<double> output_times() const;
};

/// Throws IntegrationError unless dt * max(||H(t)||, max exit rate) <= limit at sampled times.
void check_step_size(const LindbladModel& model, const TimeGrid& grid, double limit = 0.05);

struct StateSeries {
  std::vector<double> times;
  std::vector<Operator> rho;
  /// heat[alpha][k]: accumulated diagonal heat from bath alpha up to times[k].
  std::vector<std::vector<double>> heat;
  std::vector<double> bath_beta;
  double max_trace_drift = 0.0;
  double min_eigenvalue = 1.0;
};

/// -i[H(t), rho] + sum gamma (L rho L^dagger - {L^dagger L, rho}/2).
Operator lindblad_generator(const LindbladModel& model, const Operator& rho, double t);
Operator lindblad_generator(const LindbladModel& model, const ModelSnapshot& at, const Operator& rho);

/// Fixed-step RK4 of the master equation, accumulating Q_D per bath alongside.
/// Positivity is monitored: an eigenvalue below `positivity_abort` raises IntegrationError.
StateSeries evolve_density(const LindbladModel& model, const DensityMatrix& rho0, const TimeGrid& grid,
                           double positivity_abort = -1e-5);

/// Dual dissipator of one bath applied to X: sum gamma (L^dagger X L - {L^dagger L, X}/2).
Operator dual_dissipator(const LindbladModel& model, const ModelSnapshot& at, int bath, const Operator& x);
/// Dissipator of one bath applied to rho.
Operator dissipator(const LindbladModel& model, const ModelSnapshot& at, int bath, const Operator& rho);

/// dQ_D/dt = Tr[rho D*_alpha[H_D(t)]].
double diag_heat_current(const LindbladModel& model, const Operator& rho, int bath, double t);

/// -sum lambda log lambda over eigenvalues above 1e-14.
double von_neumann_entropy(const Operator& rho);

/// Delta S_S(t) - sum_alpha beta_alpha Q_D,alpha(t) along the series.
std::vector<double> second_law_gap(const StateSeries& series);

}  // namespace qfluct
