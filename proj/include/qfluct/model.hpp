#pragma once

// Lindblad model description: jump basis, H(t), baths and elementary jump channels.

#include <functional>
#include <string>
#include <vector>

#include "qfluct/hilbert.hpp"

namespace qfluct {

enum class RateLaw { bosonic, custom };

struct BathSpec {
  std::string label;
  double beta = 1.0;      // inverse temperature
  double coupling = 0.0;  // g, frequency units
  RateLaw law = RateLaw::bosonic;
};

using RateFunction = std::function<double(double)>;
using HamiltonianFunction = std::function<Operator(double)>;

/// Elementary jump L = |to><from| driven by one bath.
struct JumpChannel {
  Index from = 0;
  Index to = 0;
  int bath = 0;
  /// Only consulted for RateLaw::custom baths.
  RateFunction custom_rate;
};

/// Everything a generator needs at one instant, evaluated once per stage.
struct ModelSnapshot {
  double t = 0.0;
  Operator hamiltonian;
  Eigen::VectorXd energies;   // diagonal of H(t) in the jump basis
  std::vector<double> rates;  // gamma_lambda(t)
  /// Bath entropy increment per channel; NaN where the reverse channel is missing
  /// or one of the two rates vanishes.
  std::vector<double> entropy;
};

/// Bose-Einstein rate law with detailed balance rate(w)/rate(-w) = exp(-beta w).
double bosonic_rate(double omega, double beta, double g);

class LindbladModel {
 public:
  LindbladModel(std::vector<std::string> labels, HamiltonianFunction hamiltonian, std::vector<BathSpec> baths,
                std::vector<JumpChannel> channels);

  Index dim() const { return static_cast<Index>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<BathSpec>& baths() const { return baths_; }
  const std::vector<JumpChannel>& channels() const { return channels_; }
  std::size_t num_channels() const { return channels_.size(); }

  /// Index of the channel to->from on the same bath, or -1.
  int reverse_of(std::size_t lambda) const { return reverse_[lambda]; }

  Operator hamiltonian(double t) const;
  Eigen::VectorXd diagonal_energies(double t) const;
  double rate(std::size_t lambda, double t) const;
  ModelSnapshot snapshot(double t) const;

  bool has_custom_baths() const;
  /// Largest total exit rate over basis states at time t.
  double max_exit_rate(double t) const;

 private:
  double rate_from_energies(std::size_t lambda, const Eigen::VectorXd& energies, double t) const;

  std::vector<std::string> labels_;
  HamiltonianFunction hamiltonian_;
  std::vector<BathSpec> baths_;
  std::vector<JumpChannel> channels_;
  std::vector<int> reverse_;
};

struct TwoSpinParams {
  double J = 0.0;
  double h0 = 0.2;
  double h1 = 0.2;
  double t_f = 15.0;
  double T_a = 1.0;
  double T_b = 1.0;
  double g = 0.1;

  double field(double t) const { return h0 + (h1 - h0) * t / t_f; }
  bool operator==(const TwoSpinParams&) const = default;
};

/// H(t) = -J sx.sx - h(t)(sz.1 + 1.sz) on {uu, ud, du, dd}; each spin flips through its own bath.
/// Channels are ordered bath a: uu->du, du->uu, ud->dd, dd->ud; bath b: uu->ud, ud->uu, du->dd, dd->du.
LindbladModel build_two_spin_model(const TwoSpinParams& p);

/// Two-spin Hamiltonian at field h.
Operator two_spin_hamiltonian(double J, double h);

/// omega_lambda(t) = H_{to,to}(t) - H_{from,from}(t).
double channel_gap(const LindbladModel& model, std::size_t lambda, double t);

/// Delta s = -log(gamma_reverse / gamma_forward). Throws when microreversibility fails.
double channel_entropy(const LindbladModel& model, std::size_t lambda, double t);

struct ValidationCheck {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool ok() const;
  const ValidationCheck* find(const std::string& name) const;
};

/// Report-only validation at the given times: Hermiticity of H, index ranges,
/// microreversibility and (for bosonic baths) detailed balance to 1e-10.
ValidationReport validate_model(const LindbladModel& model, const std::vector<double>& sample_times);

}  // namespace qfluct
