#include "qfluct/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qfluct {

TimeGrid TimeGrid::covering(double t_final, double dt, std::size_t stride) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error("TimeGrid: dt must be positive");
  if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw Error("TimeGrid: t_final must be nonnegative");
  if (stride == 0) throw Error("TimeGrid: stride must be at least 1");
  const double n = t_final / dt;
  const double rounded = std::round(n);
  if (std::abs(n - rounded) > 1e-9 * std::max(1.0, n)) {
    throw Error("TimeGrid: t_final is not an integer multiple of dt");
  }
  return TimeGrid{dt, static_cast<std::size_t>(rounded), stride};
}

std::vector<std::size_t> TimeGrid::output_steps() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k <= steps; ++k) {
    if (is_output(k)) out.push_back(k);
  }
  return out;
}

std::vector<double> TimeGrid::output_times() const {
  std::vector<double> out;
  for (std::size_t k : output_steps()) out.push_back(time(k));
  return out;
}

void check_step_size(const LindbladModel& model, const TimeGrid& grid, double limit) {
  constexpr int kSamples = 9;
  for (int s = 0; s < kSamples; ++s) {
    const double t = grid.t_final() * s / (kSamples - 1);
    const EigenSystem es = eigh(model.hamiltonian(t));
    const double hnorm = es.values.cwiseAbs().maxCoeff();
    const double rate = model.max_exit_rate(t);
    const double scale = grid.dt * std::max(hnorm, rate);
    if (scale > limit) {
      std::ostringstream os;
      os << "step size too large: dt * max(||H||, exit rate) = " << scale << " at t=" << t << " exceeds " << limit;
      throw IntegrationError(os.str());
    }
  }
}

namespace {

Operator jump_operator(Index d, const JumpChannel& c) {
  Operator l = Operator::Zero(d, d);
  l(c.to, c.from) = 1.0;
  return l;
}

Eigen::VectorXd heat_rates(const LindbladModel& model, const ModelSnapshot& at, const Operator& rho) {
  Eigen::VectorXd q = Eigen::VectorXd::Zero(static_cast<Index>(model.baths().size()));
  const auto& ch = model.channels();
  for (std::size_t l = 0; l < ch.size(); ++l) {
    const double omega = at.energies(ch[l].to) - at.energies(ch[l].from);
    q(ch[l].bath) += at.rates[l] * omega * rho(ch[l].from, ch[l].from).real();
  }
  return q;
}

}  // namespace

Operator lindblad_generator(const LindbladModel& model, const ModelSnapshot& at, const Operator& rho) {
  const Index d = model.dim();
  if (rho.rows() != d || rho.cols() != d) throw DimensionError("lindblad_generator: dimension mismatch");
  Operator out = -kI * (at.hamiltonian * rho - rho * at.hamiltonian);
  const auto& ch = model.channels();
  for (std::size_t l = 0; l < ch.size(); ++l) {
    const double g = at.rates[l];
    if (g == 0.0) continue;
    const Operator jl = jump_operator(d, ch[l]);
    const Operator ldl = jl.adjoint() * jl;
    out += g * (jl * rho * jl.adjoint() - 0.5 * (ldl * rho + rho * ldl));
  }
  return out;
}

Operator lindblad_generator(const LindbladModel& model, const Operator& rho, double t) {
  return lindblad_generator(model, model.snapshot(t), rho);
}

Operator dissipator(const LindbladModel& model, const ModelSnapshot& at, int bath, const Operator& rho) {
  const Index d = model.dim();
  Operator out = Operator::Zero(d, d);
  const auto& ch = model.channels();
  for (std::size_t l = 0; l < ch.size(); ++l) {
    if (ch[l].bath != bath) continue;
    const Operator jl = jump_operator(d, ch[l]);
    const Operator ldl = jl.adjoint() * jl;
    out += at.rates[l] * (jl * rho * jl.adjoint() - 0.5 * (ldl * rho + rho * ldl));
  }
  return out;
}

Operator dual_dissipator(const LindbladModel& model, const ModelSnapshot& at, int bath, const Operator& x) {
  const Index d = model.dim();
  Operator out = Operator::Zero(d, d);
  const auto& ch = model.channels();
  for (std::size_t l = 0; l < ch.size(); ++l) {
    if (ch[l].bath != bath) continue;
    const Operator jl = jump_operator(d, ch[l]);
    const Operator ldl = jl.adjoint() * jl;
    out += at.rates[l] * (jl.adjoint() * x * jl - 0.5 * (ldl * x + x * ldl));
  }
  return out;
}

double diag_heat_current(const LindbladModel& model, const Operator& rho, int bath, double t) {
  if (bath < 0 || bath >= static_cast<int>(model.baths().size())) throw Error("diag_heat_current: unknown bath");
  const ModelSnapshot at = model.snapshot(t);
  const Operator hd = diagonal_part(at.hamiltonian);
  return (rho * dual_dissipator(model, at, bath, hd)).trace().real();
}

double von_neumann_entropy(const Operator& rho) {
  const EigenSystem es = eigh(rho, 1e-8);
  double s = 0.0;
  for (Index k = 0; k < es.values.size(); ++k) {
    const double p = es.values(k);
    if (p > 1e-14) s -= p * std::log(p);
  }
  return s;
}

StateSeries evolve_density(const LindbladModel& model, const DensityMatrix& rho0, const TimeGrid& grid,
                           double positivity_abort) {
  if (rho0.dim() != model.dim()) throw DimensionError("evolve_density: state dimension does not match model");
  check_step_size(model, grid);

  const std::size_t nb = model.baths().size();
  StateSeries out;
  out.heat.assign(nb, {});
  for (const auto& b : model.baths()) out.bath_beta.push_back(b.beta);

  Operator rho = rho0.matrix();
  Eigen::VectorXd heat = Eigen::VectorXd::Zero(static_cast<Index>(nb));
  auto record = [&](double t) {
    out.times.push_back(t);
    out.rho.push_back(rho);
    for (std::size_t a = 0; a < nb; ++a) out.heat[a].push_back(heat(static_cast<Index>(a)));
  };
  record(0.0);

  const double dt = grid.dt;
  ModelSnapshot s0 = model.snapshot(0.0);
  for (std::size_t k = 0; k < grid.steps; ++k) {
    const double t = grid.time(k);
    const ModelSnapshot sh = model.snapshot(t + 0.5 * dt);
    ModelSnapshot s1 = model.snapshot(grid.time(k + 1));

    const Operator k1 = lindblad_generator(model, s0, rho);
    const Eigen::VectorXd q1 = heat_rates(model, s0, rho);
    const Operator r2 = rho + 0.5 * dt * k1;
    const Operator k2 = lindblad_generator(model, sh, r2);
    const Eigen::VectorXd q2 = heat_rates(model, sh, r2);
    const Operator r3 = rho + 0.5 * dt * k2;
    const Operator k3 = lindblad_generator(model, sh, r3);
    const Eigen::VectorXd q3 = heat_rates(model, sh, r3);
    const Operator r4 = rho + dt * k3;
    const Operator k4 = lindblad_generator(model, s1, r4);
    const Eigen::VectorXd q4 = heat_rates(model, s1, r4);

    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    heat += (dt / 6.0) * (q1 + 2.0 * q2 + 2.0 * q3 + q4);

    const Complex tr = rho.trace();
    out.max_trace_drift = std::max(out.max_trace_drift, std::abs(tr - Complex(1.0, 0.0)));
    rho /= tr.real();

    const double lmin = eigh(rho, 1e-6).values(0);
    out.min_eigenvalue = std::min(out.min_eigenvalue, lmin);
    if (lmin < positivity_abort) {
      std::ostringstream os;
      os << "evolve_density: eigenvalue " << lmin << " at t=" << grid.time(k + 1)
         << " violates positivity; reduce the step size";
      throw IntegrationError(os.str());
    }
    if (grid.is_output(k + 1)) record(grid.time(k + 1));
    s0 = std::move(s1);
  }
  return out;
}

std::vector<double> second_law_gap(const StateSeries& series) {
  std::vector<double> gap;
  if (series.rho.empty()) return gap;
  const double s0 = von_neumann_entropy(series.rho.front());
  gap.reserve(series.rho.size());
  for (std::size_t k = 0; k < series.rho.size(); ++k) {
    double flow = 0.0;
    for (std::size_t a = 0; a < series.heat.size(); ++a) flow += series.bath_beta[a] * series.heat[a][k];
    gap.push_back(k == 0 ? 0.0 : von_neumann_entropy(series.rho[k]) - s0 - flow);
  }
  return gap;
}

}  // namespace qfluct
