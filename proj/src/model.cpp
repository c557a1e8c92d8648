#include "qfluct/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace qfluct {

double bosonic_rate(double omega, double beta, double g) {
  if (!std::isfinite(omega) || !std::isfinite(beta) || !std::isfinite(g)) {
    throw Error("bosonic_rate: non-finite input");
  }
  if (!(beta > 0.0)) throw Error("bosonic_rate: beta must be positive");
  if (g < 0.0) throw Error("bosonic_rate: coupling must be nonnegative");
  const double x = beta * std::abs(omega);
  double emission;  // g|w| / (exp(beta|w|) - 1)
  if (x < 1e-6) {
    emission = (g / beta) * (1.0 - 0.5 * x + x * x / 12.0);
  } else {
    emission = g * std::abs(omega) / std::expm1(x);
  }
  return omega >= 0.0 ? emission * std::exp(-beta * omega) : emission;
}

LindbladModel::LindbladModel(std::vector<std::string> labels, HamiltonianFunction hamiltonian,
                             std::vector<BathSpec> baths, std::vector<JumpChannel> channels)
    : labels_(std::move(labels)),
      hamiltonian_(std::move(hamiltonian)),
      baths_(std::move(baths)),
      channels_(std::move(channels)) {
  if (labels_.empty()) throw Error("LindbladModel: empty basis");
  if (!hamiltonian_) throw Error("LindbladModel: missing Hamiltonian");
  const Index d = dim();
  for (std::size_t b = 0; b < baths_.size(); ++b) {
    const auto& bath = baths_[b];
    if (bath.law == RateLaw::bosonic && !(bath.beta > 0.0 && std::isfinite(bath.beta))) {
      throw Error("LindbladModel: bath '" + bath.label + "' needs a finite positive beta");
    }
    if (bath.coupling < 0.0) throw Error("LindbladModel: bath '" + bath.label + "' has negative coupling");
  }
  for (std::size_t l = 0; l < channels_.size(); ++l) {
    const auto& c = channels_[l];
    if (c.from < 0 || c.from >= d || c.to < 0 || c.to >= d || c.from == c.to) {
      throw Error("LindbladModel: channel " + std::to_string(l) + " has invalid basis indices");
    }
    if (c.bath < 0 || c.bath >= static_cast<int>(baths_.size())) {
      throw Error("LindbladModel: channel " + std::to_string(l) + " references unknown bath");
    }
    if (baths_[c.bath].law == RateLaw::custom && !c.custom_rate) {
      throw Error("LindbladModel: channel " + std::to_string(l) + " on a custom bath has no rate function");
    }
  }
  reverse_.assign(channels_.size(), -1);
  for (std::size_t l = 0; l < channels_.size(); ++l) {
    for (std::size_t m = 0; m < channels_.size(); ++m) {
      if (channels_[m].from == channels_[l].to && channels_[m].to == channels_[l].from &&
          channels_[m].bath == channels_[l].bath) {
        reverse_[l] = static_cast<int>(m);
        break;
      }
    }
  }
}

Operator LindbladModel::hamiltonian(double t) const {
  Operator h = hamiltonian_(t);
  if (h.rows() != dim() || h.cols() != dim()) throw DimensionError("LindbladModel: Hamiltonian has wrong dimension");
  return h;
}

Eigen::VectorXd LindbladModel::diagonal_energies(double t) const { return hamiltonian(t).diagonal().real(); }

double LindbladModel::rate_from_energies(std::size_t lambda, const Eigen::VectorXd& energies, double t) const {
  const JumpChannel& c = channels_[lambda];
  const BathSpec& bath = baths_[c.bath];
  if (bath.law == RateLaw::custom) {
    const double r = c.custom_rate(t);
    if (!(r >= 0.0) || !std::isfinite(r)) {
      throw Error("LindbladModel: custom rate of channel " + std::to_string(lambda) + " is negative or non-finite");
    }
    return r;
  }
  return bosonic_rate(energies(c.to) - energies(c.from), bath.beta, bath.coupling);
}

double LindbladModel::rate(std::size_t lambda, double t) const {
  return rate_from_energies(lambda, diagonal_energies(t), t);
}

ModelSnapshot LindbladModel::snapshot(double t) const {
  ModelSnapshot s;
  s.t = t;
  s.hamiltonian = hamiltonian(t);
  s.energies = s.hamiltonian.diagonal().real();
  s.rates.resize(channels_.size());
  for (std::size_t l = 0; l < channels_.size(); ++l) s.rates[l] = rate_from_energies(l, s.energies, t);
  s.entropy.assign(channels_.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t l = 0; l < channels_.size(); ++l) {
    const int r = reverse_[l];
    if (r < 0) continue;
    const double fwd = s.rates[l];
    const double rev = s.rates[static_cast<std::size_t>(r)];
    if (fwd > 0.0 && rev > 0.0) s.entropy[l] = -std::log(rev / fwd);
  }
  return s;
}

bool LindbladModel::has_custom_baths() const {
  for (const auto& b : baths_) {
    if (b.law == RateLaw::custom) return true;
  }
  return false;
}

double LindbladModel::max_exit_rate(double t) const {
  const ModelSnapshot s = snapshot(t);
  Eigen::VectorXd exit = Eigen::VectorXd::Zero(dim());
  for (std::size_t l = 0; l < channels_.size(); ++l) exit(channels_[l].from) += s.rates[l];
  return exit.maxCoeff();
}

Operator two_spin_hamiltonian(double J, double h) {
  const Operator one = identity(2);
  return -J * tensor(pauli::x(), pauli::x()) - h * (tensor(pauli::z(), one) + tensor(one, pauli::z()));
}

LindbladModel build_two_spin_model(const TwoSpinParams& p) {
  if (!(p.T_a > 0.0) || !(p.T_b > 0.0)) throw Error("build_two_spin_model: temperatures must be positive");
  if (p.g < 0.0) throw Error("build_two_spin_model: coupling g must be nonnegative");
  if (p.h1 != p.h0 && !(p.t_f > 0.0)) throw Error("build_two_spin_model: t_f must be positive for a field ramp");

  const double J = p.J;
  const double h0 = p.h0;
  const double slope = p.h1 == p.h0 ? 0.0 : (p.h1 - p.h0) / p.t_f;
  const Operator xx = tensor(pauli::x(), pauli::x());
  const Operator zsum = tensor(pauli::z(), identity(2)) + tensor(identity(2), pauli::z());
  HamiltonianFunction ham = [=](double t) -> Operator { return -J * xx - (h0 + slope * t) * zsum; };

  std::vector<BathSpec> baths{{"a", 1.0 / p.T_a, p.g, RateLaw::bosonic}, {"b", 1.0 / p.T_b, p.g, RateLaw::bosonic}};
  // 0 = uu, 1 = ud, 2 = du, 3 = dd
  std::vector<JumpChannel> channels{
      {0, 2, 0, {}}, {2, 0, 0, {}}, {1, 3, 0, {}}, {3, 1, 0, {}},
      {0, 1, 1, {}}, {1, 0, 1, {}}, {2, 3, 1, {}}, {3, 2, 1, {}},
  };
  return LindbladModel({"uu", "ud", "du", "dd"}, std::move(ham), std::move(baths), std::move(channels));
}

double channel_gap(const LindbladModel& model, std::size_t lambda, double t) {
  if (lambda >= model.num_channels()) throw Error("channel_gap: channel index out of range");
  const Eigen::VectorXd e = model.diagonal_energies(t);
  const auto& c = model.channels()[lambda];
  return e(c.to) - e(c.from);
}

double channel_entropy(const LindbladModel& model, std::size_t lambda, double t) {
  if (lambda >= model.num_channels()) throw Error("channel_entropy: channel index out of range");
  const int r = model.reverse_of(lambda);
  if (r < 0) throw Error("channel_entropy: channel " + std::to_string(lambda) + " has no reverse channel");
  const double fwd = model.rate(lambda, t);
  const double rev = model.rate(static_cast<std::size_t>(r), t);
  if (!(fwd > 0.0) || !(rev > 0.0)) {
    throw Error("channel_entropy: microreversibility violated on channel " + std::to_string(lambda));
  }
  return -std::log(rev / fwd);
}

bool ValidationReport::ok() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

ValidationReport validate_model(const LindbladModel& model, const std::vector<double>& sample_times) {
  ValidationReport report;

  ValidationCheck herm{"hamiltonian_hermitian", true, ""};
  for (double t : sample_times) {
    const double err = hermiticity_error(model.hamiltonian(t));
    if (err > 1e-12) {
      herm.passed = false;
      herm.detail = "H(" + std::to_string(t) + ") deviates by " + std::to_string(err);
      break;
    }
  }
  report.checks.push_back(herm);

  ValidationCheck micro{"microreversibility", true, ""};
  for (std::size_t l = 0; l < model.num_channels() && micro.passed; ++l) {
    const int r = model.reverse_of(l);
    for (double t : sample_times) {
      const double fwd = model.rate(l, t);
      if (fwd <= 0.0) continue;
      if (r < 0 || !(model.rate(static_cast<std::size_t>(r), t) > 0.0)) {
        micro.passed = false;
        micro.detail = "channel " + std::to_string(l) + " (" + model.labels()[model.channels()[l].from] + "->" +
                       model.labels()[model.channels()[l].to] + ") lacks a positive reverse rate";
        break;
      }
    }
  }
  report.checks.push_back(micro);

  // Detailed balance is required of bosonic baths; for custom baths it is only reported.
  for (std::size_t b = 0; b < model.baths().size(); ++b) {
    const BathSpec& bath = model.baths()[b];
    const bool thermal = bath.law == RateLaw::bosonic;
    ValidationCheck db{"detailed_balance:" + bath.label, true, ""};
    if (!(bath.beta > 0.0)) {
      db.passed = thermal ? false : true;
      db.detail = "no temperature";
    }
    for (std::size_t l = 0; l < model.num_channels() && db.passed && bath.beta > 0.0; ++l) {
      if (model.channels()[l].bath != static_cast<int>(b)) continue;
      const int r = model.reverse_of(l);
      if (r < 0) continue;
      for (double t : sample_times) {
        const double rev = model.rate(static_cast<std::size_t>(r), t);
        if (rev <= 0.0) continue;
        const double ratio = model.rate(l, t) / rev;
        const double target = std::exp(-bath.beta * channel_gap(model, l, t));
        if (std::abs(ratio - target) >= 1e-10) {
          std::ostringstream os;
          os << "channel " << l << " at t=" << t << ": ratio " << ratio << " vs " << target;
          db.detail = os.str();
          db.passed = false;
          break;
        }
      }
    }
    if (!thermal && !db.passed) {
      // Non-thermal rates are allowed; the flag only says Delta S_B is not a bath entropy.
      db.name = "detailed_balance_info:" + bath.label;
      db.passed = true;
      db.detail = "non-thermal: " + db.detail;
    }
    report.checks.push_back(db);
  }
  return report;
}

}  // namespace qfluct
