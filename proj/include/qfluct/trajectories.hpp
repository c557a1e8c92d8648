#pragma once

// Quantum-jump unraveling with per-jump bath entropy accounting, and the
// trajectory estimators built on it.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qfluct/dynamics.hpp"
#include "qfluct/rng.hpp"
#include "qfluct/series.hpp"
#include "qfluct/stats.hpp"

namespace qfluct {

enum class InitialBasis { eigen, jump };
enum class EntropyVariant { x, y };
/// No-jump drift: the first-order step (1 - i H_eff dt) or an RK4 propagator of the same
/// linear equation. Jump probabilities are first order in both.
enum class DriftScheme { rk4, first_order };

std::string to_string(InitialBasis b);
InitialBasis initial_basis_from_string(const std::string& s);

struct InitialDraw {
  Ket ket;
  Index index = 0;
  double probability = 0.0;
};

/// The basis a mode projects onto: eigenvectors of rho0 (ascending eigenvalues) or the jump basis.
struct InitialEnsemble {
  InitialBasis basis = InitialBasis::eigen;
  Operator vectors;             // columns
  std::vector<double> weights;  // <b|rho0|b>

  InitialEnsemble(const DensityMatrix& rho0, InitialBasis basis);
  InitialDraw draw(TrajectoryRng& rng) const;
  InitialDraw fixed(Index index) const;
};

InitialDraw sample_initial(const DensityMatrix& rho0, InitialBasis basis, TrajectoryRng& rng);

struct JumpEvent {
  double t = 0.0;
  std::size_t channel = 0;
  int bath = 0;
  double omega = 0.0;
  double ds = 0.0;
};

struct Trajectory {
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  InitialBasis basis = InitialBasis::eigen;
  Index initial_index = 0;
  double initial_probability = 0.0;
  Ket initial_ket;
  std::vector<Ket> kets;        // at the output grid
  std::vector<double> entropy;  // accumulated Delta S_B at the output grid
  std::vector<JumpEvent> events;
};

/// Per-step rates, entropy increments and no-jump propagators, shared read-only by all trajectories.
class PropagationTable {
 public:
  PropagationTable(const LindbladModel& model, const TimeGrid& grid, DriftScheme scheme = DriftScheme::rk4);

  const TimeGrid& grid() const { return grid_; }
  Index dim() const { return dim_; }
  std::size_t num_channels() const { return from_.size(); }
  DriftScheme scheme() const { return scheme_; }

 private:
  friend Trajectory run_trajectory(const PropagationTable&, const InitialDraw&, TrajectoryRng&);

  TimeGrid grid_;
  Index dim_ = 0;
  DriftScheme scheme_;
  std::vector<Index> from_;
  std::vector<Index> to_;
  std::vector<int> bath_;
  // step-major arrays
  std::vector<double> rates_;
  std::vector<double> omega_;
  std::vector<double> ds_;
  std::vector<Complex> propagators_;  // row-major d x d per step
};

/// One trajectory on the table's grid. Throws IntegrationError if the no-jump norm collapses.
Trajectory run_trajectory(const PropagationTable& table, const InitialDraw& init, TrajectoryRng& rng);

/// Counts overlaps that hit the 1e-30 floor before a logarithm.
struct FloorCounter {
  std::size_t floored = 0;
  std::size_t evaluated = 0;
  void merge(const FloorCounter& o) {
    floored += o.floored;
    evaluated += o.evaluated;
  }
  /// True when more than 0.01 % of evaluations were floored.
  bool flagged() const { return evaluated > 0 && floored * 10000 > evaluated; }
};

inline constexpr double kOverlapFloor = 1e-30;

/// rho0 and rho(t) (with their logarithms) on the output grid, computed once.
class EntropyReference {
 public:
  EntropyReference(const Operator& rho0, std::vector<Operator> rho_t);

  std::size_t size() const { return rho_.size(); }
  const Operator& rho0() const { return rho0_; }
  const Operator& rho(std::size_t k) const { return rho_[k]; }

  /// Delta S_sys between psi0 at t=0 and psi at output point k.
  double system_entropy(const Ket& psi0, const Ket& psi, std::size_t k, EntropyVariant v,
                        FloorCounter* counter = nullptr) const;

 private:
  Operator rho0_;
  Operator log_rho0_;
  std::vector<Operator> rho_;
  std::vector<Operator> log_rho_;
};

/// Delta S_sys along a trajectory at each output point.
std::vector<double> system_entropy(const Trajectory& traj, const EntropyReference& ref, EntropyVariant variant,
                                   FloorCounter* counter = nullptr);

/// Streaming sample means of exp(-Delta S_tot) (variants x, y) and exp(-Delta S_B).
class FtAccumulator {
 public:
  explicit FtAccumulator(std::size_t n_times);
  void add(const Trajectory& traj, const EntropyReference& ref);
  void merge(const FtAccumulator& other);
  /// Columns: mean_exp_neg_Stot, se_Stot, mean_exp_neg_SB, se_SB, n_traj,
  /// plus mean_exp_neg_Stot_x, se_Stot_x when `with_variant_x`.
  ResultSeries result(const std::vector<double>& times, bool with_variant_x) const;

  const std::vector<RunningStats>& total_y() const { return tot_y_; }
  const std::vector<RunningStats>& total_x() const { return tot_x_; }
  const std::vector<RunningStats>& bath() const { return bath_; }
  const FloorCounter& floors() const { return floors_; }

 private:
  std::vector<RunningStats> tot_y_, tot_x_, bath_;
  FloorCounter floors_;
};

ResultSeries ft_estimators(std::span<const Trajectory> trajs, const EntropyReference& ref,
                           const std::vector<double>& times, bool with_variant_x = false);

/// Entrywise mean and standard error of w |psi(t)><psi(t)| with w = exp(-xi Delta S_B).
class OperatorAccumulator {
 public:
  OperatorAccumulator(std::size_t n_times, Index dim, double xi);
  void add(const Trajectory& traj);
  void merge(const OperatorAccumulator& other);
  Operator mean(std::size_t k) const;
  /// Standard errors of the real and imaginary parts, packed as Re + i Im.
  Operator stderr_mean(std::size_t k) const;
  std::size_t count() const { return count_; }
  double xi() const { return xi_; }

 private:
  Index dim_;
  double xi_;
  std::size_t count_ = 0;
  std::vector<RunningStats> re_, im_;  // [k][row][col]
};

struct OperatorEstimate {
  std::vector<Operator> mean;
  std::vector<Operator> stderr_mean;
  std::size_t n = 0;
};

/// Sample estimate of Psi^(1)(t | Pi_k0); all trajectories must share their initial index.
OperatorEstimate estimate_psi_one(std::span<const Trajectory> trajs, double xi = 1.0);

struct EntropyHistogram {
  Index final_index = 0;
  std::vector<double> edges;
  std::vector<double> weights;  // fraction of the ensemble per bin
};

/// Joint histogram over final basis index (weight |<j|psi(t)>|^2) and Delta S_B at output point k.
/// Every sample must fall inside [edges.front(), edges.back()].
std::vector<EntropyHistogram> entropy_histogram(std::span<const Trajectory> trajs, std::size_t k,
                                                const std::vector<double>& edges);

/// Reference data for the trajectory Jarzynski estimator.
class JarzynskiReference {
 public:
  /// All baths of `model` must share `beta`; rho0 must be Gibbs(H(0), beta).
  JarzynskiReference(const LindbladModel& model, double beta, const DensityMatrix& rho0,
                     const std::vector<double>& times);

  /// exp(-Delta S_B) <psi(t)|exp(-beta H(t))|psi(t)> / (Z_0 <psi0|rho0|psi0>) at output point k.
  double weight(const Trajectory& traj, std::size_t k) const;
  double beta() const { return beta_; }
  double z0() const { return z0_; }
  double ratio(std::size_t k) const { return z_ratio_[k]; }

 private:
  double beta_;
  double z0_;
  Operator rho0_;
  std::vector<Operator> boltzmann_;
  std::vector<double> z_ratio_;
};

struct Estimate {
  double mean = 0.0;
  double stderr_mean = 0.0;
  std::size_t n = 0;
};

/// Monte Carlo estimate of exp(-beta Delta F) at output point k.
Estimate jarzynski_estimator(std::span<const Trajectory> trajs, const JarzynskiReference& ref, std::size_t k);

}  // namespace qfluct
