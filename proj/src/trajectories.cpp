#include "qfluct/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qfluct {

std::string to_string(InitialBasis b) { return b == InitialBasis::eigen ? "eigen" : "jump"; }

InitialBasis initial_basis_from_string(const std::string& s) {
  if (s == "eigen") return InitialBasis::eigen;
  if (s == "jump") return InitialBasis::jump;
  throw Error("unknown initial basis mode '" + s + "' (expected eigen or jump)");
}

// ---------------------------------------------------------------------------
// initial states

InitialEnsemble::InitialEnsemble(const DensityMatrix& rho0, InitialBasis mode) : basis(mode) {
  const Index d = rho0.dim();
  if (mode == InitialBasis::eigen) {
    const EigenSystem es = eigh(rho0.matrix());
    vectors = es.vectors;
    for (Index k = 0; k < d; ++k) weights.push_back(std::max(0.0, es.values(k)));
  } else {
    vectors = identity(d);
    for (Index k = 0; k < d; ++k) weights.push_back(std::max(0.0, rho0.matrix()(k, k).real()));
  }
  double total = 0.0;
  for (double w : weights) total += w;
  for (double& w : weights) w /= total;
}

InitialDraw InitialEnsemble::fixed(Index index) const {
  if (index < 0 || index >= vectors.cols()) throw Error("initial index out of range");
  return {Ket(vectors.col(index)), index, weights[static_cast<std::size_t>(index)]};
}

InitialDraw InitialEnsemble::draw(TrajectoryRng& rng) const {
  const double u = rng.uniform();
  double acc = 0.0;
  Index last = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    last = static_cast<Index>(k);
    acc += weights[k];
    if (u < acc) return fixed(last);
  }
  return fixed(last);
}

InitialDraw sample_initial(const DensityMatrix& rho0, InitialBasis basis, TrajectoryRng& rng) {
  return InitialEnsemble(rho0, basis).draw(rng);
}

// ---------------------------------------------------------------------------
// propagation

PropagationTable::PropagationTable(const LindbladModel& model, const TimeGrid& grid, DriftScheme scheme)
    : grid_(grid), dim_(model.dim()), scheme_(scheme) {
  check_step_size(model, grid);
  for (const auto& c : model.channels()) {
    from_.push_back(c.from);
    to_.push_back(c.to);
    bath_.push_back(c.bath);
  }
  const std::size_t nc = from_.size();
  const Index d = dim_;
  const double dt = grid.dt;
  rates_.resize(grid.steps * nc);
  omega_.resize(grid.steps * nc);
  ds_.resize(grid.steps * nc);
  propagators_.resize(grid.steps * static_cast<std::size_t>(d * d));

  auto drift = [&](const ModelSnapshot& s) {
    Operator a = -kI * s.hamiltonian;
    for (std::size_t l = 0; l < nc; ++l) a(from_[l], from_[l]) -= 0.5 * s.rates[l];
    return a;
  };
  const Operator one = identity(d);

  ModelSnapshot s0 = model.snapshot(0.0);
  for (std::size_t k = 0; k < grid.steps; ++k) {
    for (std::size_t l = 0; l < nc; ++l) {
      const double g = s0.rates[l];
      if (g > 0.0 && std::isnan(s0.entropy[l])) {
        throw Error("trajectory entropy accounting needs a reverse channel for channel " + std::to_string(l));
      }
      rates_[k * nc + l] = g;
      omega_[k * nc + l] = s0.energies(to_[l]) - s0.energies(from_[l]);
      ds_[k * nc + l] = std::isnan(s0.entropy[l]) ? 0.0 : s0.entropy[l];
    }
    Operator m;
    ModelSnapshot s1 = model.snapshot(grid.time(k + 1));
    if (scheme == DriftScheme::first_order) {
      m = one + dt * drift(s0);
    } else {
      const ModelSnapshot sh = model.snapshot(grid.time(k) + 0.5 * dt);
      const Operator a0 = drift(s0);
      const Operator ah = drift(sh);
      const Operator a1 = drift(s1);
      const Operator k1 = a0;
      const Operator k2 = ah * (one + 0.5 * dt * k1);
      const Operator k3 = ah * (one + 0.5 * dt * k2);
      const Operator k4 = a1 * (one + dt * k3);
      m = one + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    Complex* dst = &propagators_[k * static_cast<std::size_t>(d * d)];
    for (Index r = 0; r < d; ++r) {
      for (Index c = 0; c < d; ++c) dst[r * d + c] = m(r, c);
    }
    s0 = std::move(s1);
  }
}

Trajectory run_trajectory(const PropagationTable& table, const InitialDraw& init, TrajectoryRng& rng) {
  const Index d = table.dim_;
  if (init.ket.size() != d) throw DimensionError("run_trajectory: initial ket dimension mismatch");
  const std::size_t nc = table.from_.size();
  const TimeGrid& grid = table.grid_;
  const double dt = grid.dt;

  Trajectory traj;
  traj.initial_index = init.index;
  traj.initial_probability = init.probability;
  traj.initial_ket = normalized(init.ket);

  std::vector<Complex> psi(traj.initial_ket.data(), traj.initial_ket.data() + d);
  std::vector<Complex> next(static_cast<std::size_t>(d));
  std::vector<double> pop(static_cast<std::size_t>(d));
  double entropy = 0.0;

  auto record = [&] {
    traj.kets.emplace_back(Eigen::Map<const Ket>(psi.data(), d));
    traj.entropy.push_back(entropy);
  };
  record();

  for (std::size_t k = 0; k < grid.steps; ++k) {
    const double* rates = &table.rates_[k * nc];
    for (Index j = 0; j < d; ++j) pop[static_cast<std::size_t>(j)] = std::norm(psi[static_cast<std::size_t>(j)]);
    double total = 0.0;
    for (std::size_t l = 0; l < nc; ++l) total += rates[l] * pop[static_cast<std::size_t>(table.from_[l])];
    total *= dt;

    const double u = rng.uniform();
    if (u < total) {
      std::size_t chosen = nc;
      double acc = 0.0;
      for (std::size_t l = 0; l < nc; ++l) {
        const double p = dt * rates[l] * pop[static_cast<std::size_t>(table.from_[l])];
        if (p <= 0.0) continue;
        chosen = l;
        acc += p;
        if (u < acc) break;
      }
      const auto j = static_cast<std::size_t>(table.from_[chosen]);
      const auto jp = static_cast<std::size_t>(table.to_[chosen]);
      const Complex amp = psi[j];
      const Complex phase = amp / std::abs(amp);
      std::fill(psi.begin(), psi.end(), Complex(0.0, 0.0));
      psi[jp] = phase;
      const double ds = table.ds_[k * nc + chosen];
      entropy += ds;
      traj.events.push_back({grid.time(k), chosen, table.bath_[chosen], table.omega_[k * nc + chosen], ds});
    } else {
      const Complex* m = &table.propagators_[k * static_cast<std::size_t>(d * d)];
      double norm2 = 0.0;
      for (Index r = 0; r < d; ++r) {
        Complex acc(0.0, 0.0);
        for (Index c = 0; c < d; ++c) acc += m[r * d + c] * psi[static_cast<std::size_t>(c)];
        next[static_cast<std::size_t>(r)] = acc;
        norm2 += std::norm(acc);
      }
      const double norm = std::sqrt(norm2);
      if (!(norm > 1e-12)) {
        throw IntegrationError("run_trajectory: state norm collapsed at t=" + std::to_string(grid.time(k + 1)) +
                               "; reduce the step size");
      }
      const double inv = 1.0 / norm;
      for (Index r = 0; r < d; ++r) psi[static_cast<std::size_t>(r)] = next[static_cast<std::size_t>(r)] * inv;
    }
    if (grid.is_output(k + 1)) record();
  }
  return traj;
}

// ---------------------------------------------------------------------------
// system entropy

namespace {

Operator floored_log(const Operator& rho) {
  return hermitian_function(rho, [](double p) { return std::log(std::max(p, kOverlapFloor)); });
}

double quad(const Operator& x, const Ket& psi) { return psi.dot(x * psi).real(); }

}  // namespace

EntropyReference::EntropyReference(const Operator& rho0, std::vector<Operator> rho_t)
    : rho0_(rho0), log_rho0_(floored_log(rho0)), rho_(std::move(rho_t)) {
  log_rho_.reserve(rho_.size());
  for (const auto& r : rho_) log_rho_.push_back(floored_log(r));
}

double EntropyReference::system_entropy(const Ket& psi0, const Ket& psi, std::size_t k, EntropyVariant v,
                                        FloorCounter* counter) const {
  if (k >= rho_.size()) throw Error("system_entropy: output index out of range");
  if (v == EntropyVariant::x) return -quad(log_rho_[k], psi) + quad(log_rho0_, psi0);
  double a = quad(rho_[k], psi);
  double b = quad(rho0_, psi0);
  if (counter) counter->evaluated += 2;
  if (a < kOverlapFloor) {
    a = kOverlapFloor;
    if (counter) ++counter->floored;
  }
  if (b < kOverlapFloor) {
    b = kOverlapFloor;
    if (counter) ++counter->floored;
  }
  return -std::log(a / b);
}

std::vector<double> system_entropy(const Trajectory& traj, const EntropyReference& ref, EntropyVariant variant,
                                   FloorCounter* counter) {
  if (traj.kets.size() != ref.size()) throw Error("system_entropy: trajectory and reference grids differ");
  std::vector<double> out(traj.kets.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = ref.system_entropy(traj.initial_ket, traj.kets[k], k, variant, counter);
  }
  return out;
}

// ---------------------------------------------------------------------------
// fluctuation-theorem estimators

FtAccumulator::FtAccumulator(std::size_t n_times) : tot_y_(n_times), tot_x_(n_times), bath_(n_times) {}

void FtAccumulator::add(const Trajectory& traj, const EntropyReference& ref) {
  if (traj.kets.size() != tot_y_.size() || ref.size() != tot_y_.size()) {
    throw Error("FtAccumulator: grid size mismatch");
  }
  for (std::size_t k = 0; k < tot_y_.size(); ++k) {
    const double sb = traj.entropy[k];
    const double sy = ref.system_entropy(traj.initial_ket, traj.kets[k], k, EntropyVariant::y, &floors_);
    const double sx = ref.system_entropy(traj.initial_ket, traj.kets[k], k, EntropyVariant::x);
    tot_y_[k].add(std::exp(-sb - sy));
    tot_x_[k].add(std::exp(-sb - sx));
    bath_[k].add(std::exp(-sb));
  }
}

void FtAccumulator::merge(const FtAccumulator& other) {
  for (std::size_t k = 0; k < tot_y_.size(); ++k) {
    tot_y_[k].merge(other.tot_y_[k]);
    tot_x_[k].merge(other.tot_x_[k]);
    bath_[k].merge(other.bath_[k]);
  }
  floors_.merge(other.floors_);
}

ResultSeries FtAccumulator::result(const std::vector<double>& times, bool with_variant_x) const {
  ResultSeries out(times);
  const std::size_t n = times.size();
  std::vector<double> my(n), sy(n), mb(n), sb(n), cnt(n), mx(n), sx(n);
  for (std::size_t k = 0; k < n; ++k) {
    my[k] = tot_y_[k].mean;
    sy[k] = tot_y_[k].stderr_mean();
    mb[k] = bath_[k].mean;
    sb[k] = bath_[k].stderr_mean();
    cnt[k] = static_cast<double>(tot_y_[k].n);
    mx[k] = tot_x_[k].mean;
    sx[k] = tot_x_[k].stderr_mean();
  }
  out.set("mean_exp_neg_Stot", std::move(my));
  out.set("se_Stot", std::move(sy));
  out.set("mean_exp_neg_SB", std::move(mb));
  out.set("se_SB", std::move(sb));
  out.set("n_traj", std::move(cnt));
  if (with_variant_x) {
    out.set("mean_exp_neg_Stot_x", std::move(mx));
    out.set("se_Stot_x", std::move(sx));
  }
  out.metadata["floored_overlaps"] = std::to_string(floors_.floored);
  out.metadata["overlap_evaluations"] = std::to_string(floors_.evaluated);
  out.metadata["floor_flagged"] = floors_.flagged() ? "true" : "false";
  return out;
}

ResultSeries ft_estimators(std::span<const Trajectory> trajs, const EntropyReference& ref,
                           const std::vector<double>& times, bool with_variant_x) {
  if (trajs.size() < 2) throw Error("ft_estimators: need at least two trajectories");
  FtAccumulator acc(times.size());
  for (const auto& t : trajs) acc.add(t, ref);
  return acc.result(times, with_variant_x);
}

// ---------------------------------------------------------------------------
// operator estimators

OperatorAccumulator::OperatorAccumulator(std::size_t n_times, Index dim, double xi)
    : dim_(dim), xi_(xi), re_(n_times * static_cast<std::size_t>(dim * dim)),
      im_(n_times * static_cast<std::size_t>(dim * dim)) {}

void OperatorAccumulator::add(const Trajectory& traj) {
  const std::size_t nd = static_cast<std::size_t>(dim_ * dim_);
  if (traj.kets.size() * nd != re_.size()) throw Error("OperatorAccumulator: grid size mismatch");
  for (std::size_t k = 0; k < traj.kets.size(); ++k) {
    const double w = xi_ == 0.0 ? 1.0 : std::exp(-xi_ * traj.entropy[k]);
    const Ket& psi = traj.kets[k];
    for (Index r = 0; r < dim_; ++r) {
      for (Index c = 0; c < dim_; ++c) {
        const Complex v = w * psi(r) * std::conj(psi(c));
        const std::size_t idx = k * nd + static_cast<std::size_t>(r * dim_ + c);
        re_[idx].add(v.real());
        im_[idx].add(v.imag());
      }
    }
  }
  ++count_;
}

void OperatorAccumulator::merge(const OperatorAccumulator& other) {
  for (std::size_t i = 0; i < re_.size(); ++i) {
    re_[i].merge(other.re_[i]);
    im_[i].merge(other.im_[i]);
  }
  count_ += other.count_;
}

Operator OperatorAccumulator::mean(std::size_t k) const {
  const std::size_t nd = static_cast<std::size_t>(dim_ * dim_);
  Operator m(dim_, dim_);
  for (Index r = 0; r < dim_; ++r) {
    for (Index c = 0; c < dim_; ++c) {
      const std::size_t idx = k * nd + static_cast<std::size_t>(r * dim_ + c);
      m(r, c) = Complex(re_[idx].mean, im_[idx].mean);
    }
  }
  return m;
}

Operator OperatorAccumulator::stderr_mean(std::size_t k) const {
  const std::size_t nd = static_cast<std::size_t>(dim_ * dim_);
  Operator m(dim_, dim_);
  for (Index r = 0; r < dim_; ++r) {
    for (Index c = 0; c < dim_; ++c) {
      const std::size_t idx = k * nd + static_cast<std::size_t>(r * dim_ + c);
      m(r, c) = Complex(re_[idx].stderr_mean(), im_[idx].stderr_mean());
    }
  }
  return m;
}

OperatorEstimate estimate_psi_one(std::span<const Trajectory> trajs, double xi) {
  if (trajs.empty()) throw Error("estimate_psi_one: empty trajectory set");
  const Index k0 = trajs.front().initial_index;
  const InitialBasis basis = trajs.front().basis;
  for (const auto& t : trajs) {
    if (t.initial_index != k0 || t.basis != basis) {
      throw Error("estimate_psi_one: trajectories must share their initial state");
    }
  }
  const std::size_t n_times = trajs.front().kets.size();
  OperatorAccumulator acc(n_times, trajs.front().initial_ket.size(), xi);
  for (const auto& t : trajs) acc.add(t);
  OperatorEstimate out;
  out.n = acc.count();
  for (std::size_t k = 0; k < n_times; ++k) {
    out.mean.push_back(acc.mean(k));
    out.stderr_mean.push_back(acc.stderr_mean(k));
  }
  return out;
}

// ---------------------------------------------------------------------------
// histograms

std::vector<EntropyHistogram> entropy_histogram(std::span<const Trajectory> trajs, std::size_t k,
                                                const std::vector<double>& edges) {
  if (trajs.empty()) throw Error("entropy_histogram: empty trajectory set");
  if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end())) {
    throw Error("entropy_histogram: need at least two ascending bin edges");
  }
  const Index d = trajs.front().initial_ket.size();
  const std::size_t nbins = edges.size() - 1;
  std::vector<EntropyHistogram> out(static_cast<std::size_t>(d));
  for (Index j = 0; j < d; ++j) {
    out[static_cast<std::size_t>(j)] = {j, edges, std::vector<double>(nbins, 0.0)};
  }
  const double inv_n = 1.0 / static_cast<double>(trajs.size());
  for (const auto& t : trajs) {
    if (k >= t.entropy.size()) throw Error("entropy_histogram: output index out of range");
    const double s = t.entropy[k];
    if (s < edges.front() || s > edges.back()) {
      throw Error("entropy_histogram: Delta S_B = " + std::to_string(s) + " outside the bin range");
    }
    auto it = std::upper_bound(edges.begin(), edges.end(), s);
    std::size_t bin = static_cast<std::size_t>(std::distance(edges.begin(), it));
    bin = bin == 0 ? 0 : std::min(bin - 1, nbins - 1);
    for (Index j = 0; j < d; ++j) out[static_cast<std::size_t>(j)].weights[bin] += std::norm(t.kets[k](j)) * inv_n;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Jarzynski

JarzynskiReference::JarzynskiReference(const LindbladModel& model, double beta, const DensityMatrix& rho0,
                                       const std::vector<double>& times)
    : beta_(beta), rho0_(rho0.matrix()) {
  if (!(beta > 0.0)) throw Error("jarzynski_estimator: beta must be positive");
  for (const auto& b : model.baths()) {
    if (std::abs(b.beta - beta) > 1e-12 * beta) throw Error("jarzynski_estimator: baths must share one temperature");
  }
  const Operator h0 = model.hamiltonian(0.0);
  if (max_norm(DensityMatrix::gibbs(h0, beta).matrix() - rho0_) > 1e-8) {
    throw Error("jarzynski_estimator: initial state must be Gibbs(H(0), beta)");
  }
  const EigenSystem e0 = eigh(h0);
  z0_ = 0.0;
  for (Index k = 0; k < e0.values.size(); ++k) z0_ += std::exp(-beta * e0.values(k));
  for (double t : times) {
    const Operator ht = model.hamiltonian(t);
    boltzmann_.push_back(hermitian_function(ht, [beta](double e) { return std::exp(-beta * e); }));
    const EigenSystem et = eigh(ht);
    double zt = 0.0;
    for (Index k = 0; k < et.values.size(); ++k) zt += std::exp(-beta * et.values(k));
    z_ratio_.push_back(zt / z0_);
  }
}

double JarzynskiReference::weight(const Trajectory& traj, std::size_t k) const {
  const double q0 = quad(rho0_, traj.initial_ket);
  return std::exp(-traj.entropy[k]) * quad(boltzmann_[k], traj.kets[k]) / (z0_ * q0);
}

Estimate jarzynski_estimator(std::span<const Trajectory> trajs, const JarzynskiReference& ref, std::size_t k) {
  RunningStats s;
  for (const auto& t : trajs) s.add(ref.weight(t, k));
  return {s.mean, s.stderr_mean(), s.n};
}

}  // namespace qfluct
