#include "qfluct/tilted.hpp"

#include <algorithm>
#include <cmath>

namespace qfluct {

Operator tilted_generator(const LindbladModel& model, const ModelSnapshot& at, const Operator& x, double xi) {
  const Index d = model.dim();
  if (x.rows() != d || x.cols() != d) throw DimensionError("tilted_generator: dimension mismatch");
  Operator out = -kI * (at.hamiltonian * x - x * at.hamiltonian);
  const auto& ch = model.channels();
  for (std::size_t l = 0; l < ch.size(); ++l) {
    const double g = at.rates[l];
    if (g == 0.0) continue;
    double weight = 1.0;
    if (xi != 0.0) {
      const double ds = at.entropy[l];
      if (std::isnan(ds)) {
        throw Error("tilted_generator: channel " + std::to_string(l) + " has no positive reverse rate");
      }
      weight = std::exp(-xi * ds);
    }
    const Index j = ch[l].from;
    const Index jp = ch[l].to;
    // L X L^dagger = X_jj |j'><j'|; {L^dagger L, X} = Pi_j X + X Pi_j.
    out(jp, jp) += g * weight * x(j, j);
    out.row(j) -= 0.5 * g * x.row(j);
    out.col(j) -= 0.5 * g * x.col(j);
  }
  return out;
}

Operator tilted_generator(const LindbladModel& model, const Operator& x, double xi, double t) {
  return tilted_generator(model, model.snapshot(t), x, xi);
}

namespace {

// Integrates several initial operators on one grid, sharing the per-stage snapshots.
std::vector<std::vector<Operator>> evolve_many(const LindbladModel& model, const std::vector<Operator>& x0,
                                               double xi, const TimeGrid& grid) {
  check_step_size(model, grid);
  std::vector<Operator> x = x0;
  std::vector<std::vector<Operator>> out(x0.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i].push_back(x[i]);

  const double dt = grid.dt;
  ModelSnapshot s0 = model.snapshot(0.0);
  for (std::size_t k = 0; k < grid.steps; ++k) {
    const ModelSnapshot sh = model.snapshot(grid.time(k) + 0.5 * dt);
    ModelSnapshot s1 = model.snapshot(grid.time(k + 1));
    for (auto& xi_op : x) {
      const Operator k1 = tilted_generator(model, s0, xi_op, xi);
      const Operator k2 = tilted_generator(model, sh, xi_op + 0.5 * dt * k1, xi);
      const Operator k3 = tilted_generator(model, sh, xi_op + 0.5 * dt * k2, xi);
      const Operator k4 = tilted_generator(model, s1, xi_op + dt * k3, xi);
      xi_op += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!xi_op.allFinite()) throw IntegrationError("evolve_tilted: non-finite operator; reduce the step size");
    }
    if (grid.is_output(k + 1)) {
      for (std::size_t i = 0; i < x.size(); ++i) out[i].push_back(x[i]);
    }
    s0 = std::move(s1);
  }
  return out;
}

void require_orthonormal(const Operator& basis, Index d) {
  if (basis.rows() != d || basis.cols() != d) throw DimensionError("initial basis has wrong dimension");
  if (max_norm(basis.adjoint() * basis - identity(d)) > 1e-9) throw Error("initial basis is not orthonormal");
}

}  // namespace

TiltedSeries evolve_tilted(const LindbladModel& model, const Operator& x0, double xi, const TimeGrid& grid,
                           std::string initial_tag) {
  if (x0.rows() != model.dim() || x0.cols() != model.dim()) throw DimensionError("evolve_tilted: dimension mismatch");
  auto ops = evolve_many(model, {x0}, xi, grid);
  TiltedSeries out;
  out.xi = xi;
  out.initial_tag = std::move(initial_tag);
  out.times = grid.output_times();
  out.psi = std::move(ops.front());
  return out;
}

PsiBarSeries psi_bar_series(const LindbladModel& model, const Operator& basis, const TimeGrid& grid) {
  const Index d = model.dim();
  require_orthonormal(basis, d);
  std::vector<Operator> x0;
  for (Index b = 0; b < d; ++b) x0.push_back(projector(Ket(basis.col(b))));
  const auto ops = evolve_many(model, x0, 1.0, grid);

  PsiBarSeries out;
  out.times = grid.output_times();
  const std::size_t n = out.times.size();
  out.psi_bar.assign(n, Operator::Zero(d, d));
  out.traces.assign(n, std::vector<double>(static_cast<std::size_t>(d)));
  for (std::size_t k = 0; k < n; ++k) {
    for (Index b = 0; b < d; ++b) {
      const Operator& p = ops[static_cast<std::size_t>(b)][k];
      out.psi_bar[k] += p;
      out.traces[k][static_cast<std::size_t>(b)] = p.trace().real();
    }
  }
  return out;
}

PsiBarReport psi_bar_one(const LindbladModel& model, const Operator& basis, const TimeGrid& grid) {
  const PsiBarSeries s = psi_bar_series(model, basis, grid);
  const Operator one = identity(model.dim());
  PsiBarReport r;
  r.times = s.times;
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    const double dev = max_norm(s.psi_bar[k] - one);
    r.deviation.push_back(dev);
    double tsum = 0.0;
    for (double tr : s.traces[k]) tsum += tr;
    r.trace_sum.push_back(tsum);
    r.max_deviation = std::max(r.max_deviation, dev);
  }
  return r;
}

PsiBarReport psi_bar_one(const LindbladModel& model, const TimeGrid& grid) {
  return psi_bar_one(model, identity(model.dim()), grid);
}

std::vector<double> ft_functional_series(const LindbladModel& model, const DensityMatrix& rho0,
                                         const std::vector<Operator>& rho_f, const TimeGrid& grid) {
  if (rho0.dim() != model.dim()) throw DimensionError("ft_functional: rho0 dimension mismatch");
  const std::size_t n = grid.output_steps().size();
  if (rho_f.size() != n) throw Error("ft_functional: need one final state per output time");
  for (const auto& f : rho_f) {
    if (f.rows() != model.dim() || f.cols() != model.dim()) throw DimensionError("ft_functional: rho_f dimension");
    if (std::abs(f.trace() - Complex(1.0, 0.0)) > 1e-8) throw Error("ft_functional: final state must have unit trace");
  }
  const EigenSystem es = eigh(rho0.matrix());
  const PsiBarSeries s = psi_bar_series(model, es.vectors, grid);
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = (s.psi_bar[k] * rho_f[k]).trace().real();
  return out;
}

double ft_functional(const LindbladModel& model, const DensityMatrix& rho0, const DensityMatrix& rho_f,
                     const TimeGrid& grid) {
  const std::size_t n = grid.output_steps().size();
  return ft_functional_series(model, rho0, std::vector<Operator>(n, rho_f.matrix()), grid).back();
}

JarzynskiExact jarzynski_lhs(const LindbladModel& model, double beta, const TimeGrid& grid) {
  if (!(beta > 0.0)) throw Error("jarzynski_lhs: beta must be positive");
  for (const auto& b : model.baths()) {
    if (std::abs(b.beta - beta) > 1e-12 * beta) throw Error("jarzynski_lhs: baths must share one temperature");
  }
  const Index d = model.dim();
  const Operator h0 = model.hamiltonian(0.0);
  const EigenSystem e0 = eigh(h0);
  const DensityMatrix rho0 = DensityMatrix::gibbs(h0, beta);

  double z0 = 0.0;
  for (Index k = 0; k < d; ++k) z0 += std::exp(-beta * e0.values(k));

  // Jump-basis projections need the individual Psi(Pi_j), not just their sum.
  std::vector<Operator> jump_x0;
  for (Index j = 0; j < d; ++j) jump_x0.push_back(projector(d, j));
  const auto jump_ops = evolve_many(model, jump_x0, 1.0, grid);

  std::vector<Operator> eig_x0;
  for (Index b = 0; b < d; ++b) eig_x0.push_back(projector(Ket(e0.vectors.col(b))));
  const auto eig_ops = evolve_many(model, eig_x0, 1.0, grid);

  JarzynskiExact out;
  out.times = grid.output_times();
  for (std::size_t k = 0; k < out.times.size(); ++k) {
    const double t = out.times[k];
    const Operator ht = model.hamiltonian(t);
    const EigenSystem et = eigh(ht);
    double zt = 0.0;
    for (Index m = 0; m < d; ++m) zt += std::exp(-beta * et.values(m));
    const Operator boltz = hermitian_function(ht, [beta](double e) { return std::exp(-beta * e); });

    Operator weighted = Operator::Zero(d, d);
    for (Index b = 0; b < d; ++b) {
      const double energy = e0.values(b);
      const double p = std::exp(-beta * energy) / z0;
      weighted += p * std::exp(beta * energy) * eig_ops[static_cast<std::size_t>(b)][k];
    }
    out.lhs.push_back((weighted * boltz).trace().real());
    out.rhs.push_back(zt / z0);

    Operator weighted_j = Operator::Zero(d, d);
    for (Index j = 0; j < d; ++j) {
      const double p = rho0.matrix()(j, j).real();
      weighted_j += p * std::exp(beta * h0(j, j).real()) * jump_ops[static_cast<std::size_t>(j)][k];
    }
    out.lhs_jump_basis.push_back((weighted_j * boltz).trace().real());
  }
  return out;
}

std::vector<double> generating_function(const LindbladModel& model, const DensityMatrix& rho0, double xi,
                                        const TimeGrid& grid) {
  const TiltedSeries s = evolve_tilted(model, rho0.matrix(), xi, grid);
  std::vector<double> out;
  for (const auto& p : s.psi) out.push_back(p.trace().real());
  return out;
}

std::vector<double> mean_bath_entropy(const LindbladModel& model, const DensityMatrix& rho0, const TimeGrid& grid,
                                      double step) {
  const auto plus = generating_function(model, rho0, step, grid);
  const auto minus = generating_function(model, rho0, -step, grid);
  std::vector<double> out(plus.size());
  for (std::size_t k = 0; k < plus.size(); ++k) out[k] = -(std::log(plus[k]) - std::log(minus[k])) / (2.0 * step);
  return out;
}

}  // namespace qfluct
