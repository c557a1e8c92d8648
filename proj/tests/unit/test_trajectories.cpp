#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <map>
#include <optional>

#include "generators.hpp"
#include "qfluct/tilted.hpp"
#include "qfluct/trajectories.hpp"

using namespace qfluct;

namespace {

const std::vector<double> kDiagonalWeights{0.4, 0.275, 0.175, 0.15};

TwoSpinParams params(double J, double T_b, double h0 = 0.2, double h1 = 0.2, double t_f = 15.0) {
  TwoSpinParams p;
  p.J = J;
  p.T_b = T_b;
  p.h0 = h0;
  p.h1 = h1;
  p.t_f = t_f;
  return p;
}

DensityMatrix coherent_state() {
  Operator rho0(4, 4);
  rho0 << 0.2790832323, -0.0266959918, 0.0246248117, -0.0025197522,  //
      -0.0266959918, 0.2569224128, -0.0024339119, 0.0250782265,      //
      0.0246248117, -0.0024339119, 0.2176070434, -0.0230928867,      //
      -0.0025197522, 0.0250782265, -0.0230928867, 0.2463873115;
  return DensityMatrix::from_operator(rho0, Tolerances{1e-9, 1e-8, -1e-7, 1e-9, 1e-8});
}

std::vector<Trajectory> sample(const PropagationTable& table, const InitialEnsemble& init, std::size_t n,
                               std::uint64_t seed, std::optional<Index> fixed = std::nullopt) {
  std::vector<Trajectory> out;
  for (std::size_t i = 0; i < n; ++i) {
    TrajectoryRng rng(seed, i);
    const InitialDraw d = fixed ? init.fixed(*fixed) : init.draw(rng);
    Trajectory t = run_trajectory(table, d, rng);
    t.seed = seed;
    t.index = i;
    t.basis = init.basis;
    out.push_back(std::move(t));
  }
  return out;
}

Index support(const Ket& v) {
  Index best = 0;
  v.cwiseAbs().maxCoeff(&best);
  return best;
}

}  // namespace

TEST_CASE("initial sampling frequencies") {
  constexpr int kDraws = 100000;
  auto frequencies = [&](const DensityMatrix& rho, InitialBasis mode, bool by_support) {
    std::vector<double> f(4, 0.0);
    for (int i = 0; i < kDraws; ++i) {
      TrajectoryRng rng(5, static_cast<std::uint64_t>(i));
      const InitialDraw d = sample_initial(rho, mode, rng);
      f[static_cast<std::size_t>(by_support ? support(d.ket) : d.index)] += 1.0 / kDraws;
    }
    return f;
  };
  const DensityMatrix diag = DensityMatrix::diagonal(kDiagonalWeights);
  for (InitialBasis mode : {InitialBasis::eigen, InitialBasis::jump}) {
    const std::vector<double> f = frequencies(diag, mode, true);
    for (std::size_t j = 0; j < 4; ++j) {
      const double p = kDiagonalWeights[j];
      CHECK(std::abs(f[j] - p) < 3.0 * std::sqrt(p * (1 - p) / kDraws));
    }
  }

  const DensityMatrix app = coherent_state();
  const std::vector<double> f = frequencies(app, InitialBasis::jump, false);
  for (Index j = 0; j < 4; ++j) {
    const double p = app.matrix()(j, j).real();
    CHECK(std::abs(f[static_cast<std::size_t>(j)] - p) < 3.0 * std::sqrt(p * (1 - p) / kDraws));
  }

  const Ket phi = gen::Source(51).ket(4);
  const DensityMatrix pure = DensityMatrix::pure(phi);
  for (int i = 0; i < 100; ++i) {
    TrajectoryRng rng(9, static_cast<std::uint64_t>(i));
    const InitialDraw d = sample_initial(pure, InitialBasis::eigen, rng);
    CHECK(std::abs(std::abs(d.ket.dot(phi)) - 1.0) < 1e-12);
    CHECK(d.probability == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(InitialEnsemble(diag, InitialBasis::eigen).fixed(4), Error);
  CHECK_THROWS_AS(initial_basis_from_string("energy"), Error);
  CHECK(initial_basis_from_string(to_string(InitialBasis::jump)) == InitialBasis::jump);
}

TEST_CASE("classical waiting time out of up-up matches the exit rate") {
  const LindbladModel m = build_two_spin_model(params(0.0, 1.0, 0.2, 0.2, 150.0));
  const PropagationTable table(m, TimeGrid::covering(150.0, 0.02, 7500));
  const InitialEnsemble init(DensityMatrix::diagonal(kDiagonalWeights), InitialBasis::jump);
  const double exit_rate = 2.0 * bosonic_rate(0.4, 1.0, 0.1);
  CHECK(exit_rate == doctest::Approx(0.1090339788).epsilon(1e-9));
  RunningStats wait;
  for (const auto& t : sample(table, init, 10000, 3, Index{0})) {
    REQUIRE_FALSE(t.events.empty());
    wait.add(t.events.front().t);
  }
  // Per-step sampling shifts the mean by -dt, far below the statistical error.
  CHECK(std::abs(wait.mean - 1.0 / exit_rate) < 3.0 * wait.stderr_mean());
}

TEST_CASE("near-zero temperature: one-way decay with monotone bath entropy") {
  const LindbladModel m({"up", "down"}, [](double) { return Operator(0.5 * pauli::z()); },
                        {{"c", 1.0, 1.0, RateLaw::custom}},
                        {{0, 1, 0, [](double) { return 0.5; }}, {1, 0, 0, [](double) { return 1e-9; }}});
  const PropagationTable table(m, TimeGrid::covering(10.0, 0.01, 100));
  const InitialEnsemble init(DensityMatrix::pure(basis_ket(2, 0)), InitialBasis::jump);
  std::size_t up_jumps = 0, decays = 0;
  for (const auto& t : sample(table, init, 2000, 4)) {
    for (const auto& e : t.events) {
      if (e.channel == 1) ++up_jumps;
      if (e.channel == 0) ++decays;
      CHECK(e.ds > 0.0);
    }
    for (std::size_t k = 1; k < t.entropy.size(); ++k) CHECK(t.entropy[k] >= t.entropy[k - 1]);
    CHECK(t.entropy.front() == 0.0);
  }
  CHECK(up_jumps == 0);
  CHECK(decays > 1900);
}

TEST_CASE("trajectory invariants") {
  const LindbladModel m = build_two_spin_model(params(0.1, 1.2, 0.0, 0.4));
  const TimeGrid grid = TimeGrid::covering(15.0, 0.005, 100);
  const PropagationTable table(m, grid);
  const InitialEnsemble init(coherent_state(), InitialBasis::eigen);
  const std::vector<double> times = grid.output_times();
  for (const auto& t : sample(table, init, 200, 6)) {
    CHECK(t.entropy.front() == 0.0);
    REQUIRE(t.kets.size() == times.size());
    for (const auto& k : t.kets) CHECK(std::abs(k.norm() - 1.0) < 1e-9);
    for (std::size_t k = 0; k < times.size(); ++k) {
      double acc = 0.0;
      for (const auto& e : t.events) {
        if (e.t < times[k] - 1e-12) acc += e.ds;
      }
      CHECK(std::abs(acc - t.entropy[k]) < 1e-12);
    }
    for (const auto& e : t.events) {
      const double beta = m.baths()[static_cast<std::size_t>(e.bath)].beta;
      CHECK(std::abs(e.ds + beta * e.omega) < 1e-10);
    }
  }
}

TEST_CASE("identical seed and index give a bit-identical trajectory") {
  const LindbladModel m = build_two_spin_model(params(0.1, 1.2));
  const PropagationTable table(m, TimeGrid::covering(15.0, 0.005, 100));
  const InitialEnsemble init(coherent_state(), InitialBasis::eigen);
  const auto a = sample(table, init, 20, 77), b = sample(table, init, 20, 77);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].events.size() == b[i].events.size());
    for (std::size_t k = 0; k < a[i].kets.size(); ++k) {
      CHECK(a[i].kets[k] == b[i].kets[k]);
      CHECK(a[i].entropy[k] == b[i].entropy[k]);
    }
  }
}

TEST_CASE("system entropy variants") {
  SUBCASE("classical case: both variants agree per trajectory") {
    const LindbladModel m = build_two_spin_model(params(0.0, 1.2));
    const TimeGrid grid = TimeGrid::covering(15.0, 0.005, 100);
    const DensityMatrix rho0 = DensityMatrix::diagonal(kDiagonalWeights);
    const EntropyReference ref(rho0.matrix(), evolve_density(m, rho0, grid).rho);
    const PropagationTable table(m, grid);
    for (const auto& t : sample(table, InitialEnsemble(rho0, InitialBasis::jump), 500, 8)) {
      const auto x = system_entropy(t, ref, EntropyVariant::x);
      const auto y = system_entropy(t, ref, EntropyVariant::y);
      CHECK(x.front() == 0.0);
      CHECK(y.front() == 0.0);
      for (std::size_t k = 0; k < x.size(); ++k) CHECK(std::abs(x[k] - y[k]) < 1e-10);
    }
  }
  SUBCASE("coherent case: variants differ") {
    const LindbladModel m = build_two_spin_model(params(0.1, 1.2));
    const TimeGrid grid = TimeGrid::covering(15.0, 0.005, 100);
    const DensityMatrix rho0 = coherent_state();
    const EntropyReference ref(rho0.matrix(), evolve_density(m, rho0, grid).rho);
    const PropagationTable table(m, grid);
    double max_diff = 0.0;
    for (const auto& t : sample(table, InitialEnsemble(rho0, InitialBasis::eigen), 50, 9)) {
      const auto x = system_entropy(t, ref, EntropyVariant::x);
      const auto y = system_entropy(t, ref, EntropyVariant::y);
      CHECK(std::abs(x.front()) < 1e-12);
      CHECK(std::abs(y.front()) < 1e-12);
      for (std::size_t k = 0; k < x.size(); ++k) max_diff = std::max(max_diff, std::abs(x[k] - y[k]));
    }
    CHECK(max_diff > 1e-3);
  }
}

TEST_CASE("overlap floor counting") {
  const Operator rho0 = projector(2, 0);
  const EntropyReference ref(rho0, {rho0});
  FloorCounter c;
  const double s = ref.system_entropy(basis_ket(2, 0), basis_ket(2, 1), 0, EntropyVariant::y, &c);
  CHECK(std::isfinite(s));
  CHECK(s == doctest::Approx(-std::log(kOverlapFloor)));
  CHECK(c.floored == 1);
  CHECK(c.evaluated >= 1);
  CHECK(c.flagged());
  FloorCounter quiet{0, 100000};
  CHECK_FALSE(quiet.flagged());
}

TEST_CASE("fluctuation theorem estimators") {
  SUBCASE("no jumps possible and a stationary pure-basis state: estimators are exactly one") {
    TwoSpinParams p = params(0.0, 1.0);
    p.g = 0.0;
    const LindbladModel m = build_two_spin_model(p);
    const TimeGrid grid = TimeGrid::covering(15.0, 0.01, 100);
    const DensityMatrix rho0 = DensityMatrix::diagonal(kDiagonalWeights);
    const EntropyReference ref(rho0.matrix(), evolve_density(m, rho0, grid).rho);
    const auto trajs = sample(PropagationTable(m, grid), InitialEnsemble(rho0, InitialBasis::jump), 200, 10);
    const ResultSeries r = ft_estimators(trajs, ref, grid.output_times());
    for (double v : r.column("mean_exp_neg_Stot")) CHECK(std::abs(v - 1.0) < 1e-12);
    for (double v : r.column("mean_exp_neg_SB")) CHECK(v == 1.0);
  }
  SUBCASE("coherent initial state, two temperatures") {
    const LindbladModel m = build_two_spin_model(params(0.1, 1.2));
    const TimeGrid grid = TimeGrid::covering(15.0, 0.005, 100);
    const DensityMatrix rho0 = coherent_state();
    const EntropyReference ref(rho0.matrix(), evolve_density(m, rho0, grid).rho);
    const auto trajs = sample(PropagationTable(m, grid), InitialEnsemble(rho0, InitialBasis::eigen), 4000, 11);
    const ResultSeries r = ft_estimators(trajs, ref, grid.output_times(), true);
    const auto& mean = r.column("mean_exp_neg_Stot");
    const auto& se = r.column("se_Stot");
    CHECK(mean.front() == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t k = 1; k < mean.size(); ++k) CHECK(std::abs(mean[k] - 1.0) < 3.0 * se[k]);
    CHECK(r.has("mean_exp_neg_Stot_x"));
    CHECK(r.column("n_traj").back() == 4000.0);
    CHECK(r.metadata.count("floored_overlaps") == 1);
    CHECK_THROWS_AS(ft_estimators(std::span<const Trajectory>(trajs.data(), 1), ref, grid.output_times()), Error);
  }
}

TEST_CASE("psi-one estimate against the exact tilted evolution") {
  const LindbladModel m = build_two_spin_model(params(0.1, 1.2, 0.2, 0.2, 5.0));
  const TimeGrid grid = TimeGrid::covering(5.0, 0.005, 100);
  const InitialEnsemble init(DensityMatrix::diagonal(kDiagonalWeights), InitialBasis::jump);
  const auto trajs = sample(PropagationTable(m, grid), init, 10000, 12, Index{1});
  for (double xi : {1.0, 0.0}) {
    const OperatorEstimate est = estimate_psi_one(trajs, xi);
    const TiltedSeries exact = evolve_tilted(m, projector(4, 1), xi, grid);
    CHECK(max_norm(est.mean.front() - projector(4, 1)) == 0.0);
    for (std::size_t k = 0; k < exact.psi.size(); ++k) {
      CHECK(hermiticity_error(est.mean[k]) < 1e-12);
      for (Index r = 0; r < 4; ++r) {
        for (Index c = 0; c < 4; ++c) {
          const Complex d = est.mean[k](r, c) - exact.psi[k](r, c);
          const Complex se = est.stderr_mean[k](r, c);
          CHECK(std::abs(d.real()) <= 5.0 * se.real() + 1e-10);
          CHECK(std::abs(d.imag()) <= 5.0 * se.imag() + 1e-10);
        }
      }
    }
  }
  auto mixed = sample(PropagationTable(m, grid), init, 2, 13);
  mixed[1].initial_index = mixed[0].initial_index + 1;
  CHECK_THROWS_AS(estimate_psi_one(mixed), Error);
  CHECK_THROWS_AS(estimate_psi_one(std::span<const Trajectory>{}), Error);
}

TEST_CASE("entropy histogram") {
  const TwoSpinParams p = params(0.0, 1.2, 0.2, 0.2, 2.0);
  const LindbladModel m = build_two_spin_model(p);
  const TimeGrid grid = TimeGrid::covering(2.0, 0.01, 100);
  const InitialEnsemble init(DensityMatrix::diagonal(kDiagonalWeights), InitialBasis::jump);
  constexpr std::size_t kN = 20000;
  const auto trajs = sample(PropagationTable(m, grid), init, kN, 14, Index{0});
  std::vector<double> edges;
  // Edges sit halfway between reachable entropy values (multiples of 0.4 and 1/3 combined).
  for (int i = 0; i <= 80; ++i) edges.push_back(-2.025 + 0.05 * i);

  const auto h0 = entropy_histogram(trajs, 0, edges);
  double total0 = 0.0;
  for (const auto& h : h0) {
    for (std::size_t b = 0; b < h.weights.size(); ++b) {
      total0 += h.weights[b];
      const bool zero_bin = h.edges[b] <= 0.0 && 0.0 < h.edges[b + 1];
      if (!zero_bin) CHECK(h.weights[b] == 0.0);
    }
  }
  CHECK(total0 == doctest::Approx(1.0).epsilon(1e-12));

  // Exact distribution of the discretized classical process by dynamic programming over
  // (state, accumulated entropy): each step of width dt jumps through channel l with probability g_l dt.
  std::map<std::pair<Index, long long>, double> dist{{{0, 0}, 1.0}};
  const double unit = 1e-9;
  for (std::size_t k = 0; k < grid.steps; ++k) {
    std::map<std::pair<Index, long long>, double> next;
    for (const auto& [key, prob] : dist) {
      double stay = 1.0;
      for (std::size_t l = 0; l < m.num_channels(); ++l) {
        if (m.channels()[l].from != key.first) continue;
        const double pj = m.rate(l, 0.0) * grid.dt;
        stay -= pj;
        const long long ds = std::llround(channel_entropy(m, l, 0.0) / unit);
        next[{m.channels()[l].to, key.second + ds}] += prob * pj;
      }
      next[key] += prob * stay;
    }
    dist = std::move(next);
  }
  const std::size_t last = grid.output_steps().size() - 1;
  const auto h = entropy_histogram(trajs, last, edges);
  std::vector<std::vector<double>> oracle(4, std::vector<double>(edges.size() - 1, 0.0));
  for (const auto& [key, prob] : dist) {
    const double s = static_cast<double>(key.second) * unit;
    const auto it = std::upper_bound(edges.begin(), edges.end(), s);
    oracle[static_cast<std::size_t>(key.first)][static_cast<std::size_t>(it - edges.begin() - 1)] += prob;
  }
  double total = 0.0;
  for (std::size_t j = 0; j < 4; ++j) {
    double marginal = 0.0;
    for (std::size_t b = 0; b < oracle[j].size(); ++b) {
      const double pr = oracle[j][b];
      const double emp = h[j].weights[b];
      total += emp;
      marginal += emp;
      CHECK(std::abs(emp - pr) <= 3.0 * std::sqrt(pr * (1 - pr) / kN) + 1e-12);
    }
    // Marginal over the entropy equals the population from the master equation.
    const double pop =
        evolve_density(m, DensityMatrix::pure(basis_ket(4, 0)), grid).rho.back()(static_cast<Index>(j), static_cast<Index>(j)).real();
    CHECK(std::abs(marginal - pop) <= 3.0 * std::sqrt(pop * (1 - pop) / kN) + 1e-12);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(entropy_histogram(trajs, last, {-0.01, 0.01}), Error);
}

TEST_CASE("Jarzynski trajectory estimator") {
  const TimeGrid grid = TimeGrid::covering(15.0, 0.005, 3000);
  const std::vector<double> times = grid.output_times();
  auto estimate = [&](const TwoSpinParams& p, std::uint64_t seed) {
    const LindbladModel m = build_two_spin_model(p);
    const DensityMatrix rho0 = DensityMatrix::gibbs(m.hamiltonian(0.0), 1.0);
    const JarzynskiReference ref(m, 1.0, rho0, times);
    const auto trajs = sample(PropagationTable(m, grid), InitialEnsemble(rho0, InitialBasis::jump), 10000, seed);
    return std::make_pair(jarzynski_estimator(trajs, ref, times.size() - 1), ref.ratio(times.size() - 1));
  };
  {
    const auto [est, ratio] = estimate(params(0.0, 1.0, 0.0, 0.4), 15);
    CHECK(ratio == doctest::Approx(1.168717473).epsilon(1e-9));
    CHECK(std::abs(est.mean - 1.168717473) < 3.0 * est.stderr_mean);
  }
  {
    const auto [est, ratio] = estimate(params(0.0, 1.0), 16);
    CHECK(ratio == doctest::Approx(1.0));
    CHECK(std::abs(est.mean - 1.0) < 3.0 * est.stderr_mean + 1e-12);
  }
  const LindbladModel hot = build_two_spin_model(params(0.0, 1.2));
  CHECK_THROWS_AS(JarzynskiReference(hot, 1.0, DensityMatrix::gibbs(hot.hamiltonian(0.0), 1.0), times), Error);
  const LindbladModel eq = build_two_spin_model(params(0.0, 1.0));
  CHECK_THROWS_AS(JarzynskiReference(eq, 1.0, DensityMatrix::diagonal(kDiagonalWeights), times), Error);
}

TEST_CASE("propagation table requires reverse channels and both drift schemes agree") {
  const LindbladModel one_way({"u", "d"}, [](double) { return Operator(pauli::z()); },
                              {{"c", 1.0, 1.0, RateLaw::custom}}, {{0, 1, 0, [](double) { return 0.5; }}});
  CHECK_THROWS_AS(PropagationTable(one_way, TimeGrid::covering(1.0, 0.01)), Error);

  const LindbladModel m = build_two_spin_model(params(0.1, 1.2, 0.2, 0.2, 5.0));
  const TimeGrid grid = TimeGrid::covering(5.0, 0.002, 500);
  const InitialEnsemble init(coherent_state(), InitialBasis::eigen);
  const auto rk = sample(PropagationTable(m, grid, DriftScheme::rk4), init, 3000, 17);
  const auto fo = sample(PropagationTable(m, grid, DriftScheme::first_order), init, 3000, 17);
  OperatorAccumulator a(rk.front().kets.size(), 4, 0.0), b(fo.front().kets.size(), 4, 0.0);
  for (const auto& t : rk) a.add(t);
  for (const auto& t : fo) b.add(t);
  // Same random streams: the two averages differ only by the O(dt) drift error.
  CHECK(max_norm(a.mean(1) - b.mean(1)) < 0.02);
}
