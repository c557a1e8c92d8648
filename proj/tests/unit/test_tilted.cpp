#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "qfluct/tilted.hpp"

using namespace qfluct;

namespace {

TwoSpinParams params(double J, double T_b, double h0 = 0.2, double h1 = 0.2, double t_f = 15.0) {
  TwoSpinParams p;
  p.J = J;
  p.T_b = T_b;
  p.h0 = h0;
  p.h1 = h1;
  p.t_f = t_f;
  return p;
}

// Dual generator written out from its component form: for every channel j -> j'' with rate g,
// g (X_{j''j''} Pi_j - (Pi_j X + X Pi_j)/2), plus the Hamiltonian part.
Operator dual_reference(const LindbladModel& m, const Operator& x, double t) {
  const Index d = m.dim();
  const Operator h = m.hamiltonian(t);
  Operator out = -kI * (h * x - x * h);
  for (std::size_t l = 0; l < m.num_channels(); ++l) {
    const Index j = m.channels()[l].from, jpp = m.channels()[l].to;
    const double g = m.rate(l, t);
    const Operator pj = projector(d, j);
    out += g * (x(jpp, jpp) * pj - 0.5 * (pj * x + x * pj));
  }
  return out;
}

std::vector<Operator> constant(const Operator& rho, std::size_t n) { return std::vector<Operator>(n, rho); }

}  // namespace

TEST_CASE("tilted generator at xi=0 is the Lindblad generator") {
  gen::for_all(30, 31, [](gen::Source& s, int) {
    const TwoSpinParams p = s.two_spin();
    const LindbladModel m = build_two_spin_model(p);
    const Operator x = s.hermitian(4);
    const double t = s.uniform(0.0, p.t_f);
    CHECK(max_norm(tilted_generator(m, x, 0.0, t) - lindblad_generator(m, x, t)) < 1e-12);
  });
}

TEST_CASE("tilted generator at xi=1 annihilates the identity and equals the dual generator") {
  gen::for_all(100, 32, [](gen::Source& s, int) {
    const TwoSpinParams p = s.two_spin();
    const LindbladModel m = build_two_spin_model(p);
    const double t = s.uniform(0.0, p.t_f);
    CHECK(max_norm(tilted_generator(m, identity(4), 1.0, t)) < 1e-12);
    const Operator x = s.hermitian(4);
    const Operator tilted = tilted_generator(m, x, 1.0, t);
    CHECK(max_norm(tilted - dual_reference(m, x, t)) < 1e-12);

    const ModelSnapshot at = m.snapshot(t);
    Operator via_dynamics = -kI * (at.hamiltonian * x - x * at.hamiltonian);
    for (int a = 0; a < 2; ++a) via_dynamics += dual_dissipator(m, at, a, x);
    CHECK(max_norm(tilted - via_dynamics) < 1e-12);
  });
}

TEST_CASE("tilted generator needs reverse channels when xi != 0") {
  const LindbladModel m({"u", "d"}, [](double) { return Operator(pauli::z()); },
                        {{"c", 1.0, 1.0, RateLaw::custom}}, {{0, 1, 0, [](double) { return 1.0; }}});
  CHECK_NOTHROW(tilted_generator(m, identity(2), 0.0, 0.0));
  CHECK_THROWS_AS(tilted_generator(m, identity(2), 1.0, 0.0), Error);
  CHECK_THROWS_AS(tilted_generator(build_two_spin_model({}), identity(2), 1.0, 0.0), DimensionError);
}

TEST_CASE("evolve_tilted reproduces density evolution at xi=0 and the identity at xi=1") {
  const LindbladModel m = build_two_spin_model(params(0.1, 1.2, 0.0, 0.4));
  const TimeGrid grid = TimeGrid::covering(15.0, 0.01, 50);
  const DensityMatrix rho0 = DensityMatrix::from_operator(gen::Source(3).density(4));
  const TiltedSeries t0 = evolve_tilted(m, rho0.matrix(), 0.0, grid, "rho0");
  const StateSeries s = evolve_density(m, rho0, grid);
  REQUIRE(t0.psi.size() == s.rho.size());
  for (std::size_t k = 0; k < s.rho.size(); ++k) CHECK(max_norm(t0.psi[k] - s.rho[k]) < 1e-9);
  CHECK(t0.at(3).initial_tag == "rho0");

  const TiltedSeries one = evolve_tilted(m, identity(4), 1.0, grid);
  for (const auto& x : one.psi) CHECK(max_norm(x - identity(4)) < 1e-9);

  const TiltedSeries pk = evolve_tilted(m, projector(4, 1), 1.0, grid);
  CHECK(max_norm(pk.psi.front() - projector(4, 1)) == 0.0);
  for (const auto& x : pk.psi) CHECK(hermiticity_error(x) < 1e-9);
}

TEST_CASE("psi-bar stays at the identity in any initial basis") {
  const TimeGrid grid = TimeGrid::covering(15.0, 0.005, 100);
  for (const TwoSpinParams& p : {params(0.1, 1.2), params(0.2, 1.2, 0.0, 0.4)}) {
    const LindbladModel m = build_two_spin_model(p);
    const PsiBarReport jump = psi_bar_one(m, grid);
    CHECK(jump.max_deviation < 1e-7);
    for (double s : jump.trace_sum) CHECK(std::abs(s - 4.0) < 1e-7);

    const Operator u = gen::Source(33).unitary(4);
    const PsiBarSeries rotated = psi_bar_series(m, u, grid);
    const PsiBarSeries canonical = psi_bar_series(m, identity(4), grid);
    for (std::size_t k = 0; k < rotated.times.size(); ++k) {
      CHECK(max_norm(rotated.psi_bar[k] - canonical.psi_bar[k]) < 1e-9);
      double sum = 0.0;
      for (double tr : rotated.traces[k]) sum += tr;
      CHECK(std::abs(sum - 4.0) < 1e-7);
    }
  }
  Operator skew = identity(4);
  skew(0, 1) = 0.3;
  CHECK_THROWS_AS(psi_bar_series(build_two_spin_model({}), skew, grid), Error);
}

TEST_CASE("integral fluctuation theorem for arbitrary initial and final states") {
  const TwoSpinParams p = params(0.1, 1.2);
  const LindbladModel m = build_two_spin_model(p);
  const TimeGrid grid = TimeGrid::covering(15.0, 0.005, 3000);
  gen::for_all(5, 34, [&](gen::Source& s, int) {
    const DensityMatrix rho0 = DensityMatrix::from_operator(s.density(4));
    const DensityMatrix rhof = DensityMatrix::from_operator(s.density(4));
    CHECK(std::abs(ft_functional(m, rho0, rhof, grid) - 1.0) < 1e-7);
    CHECK(std::abs(ft_functional(m, rho0, DensityMatrix::maximally_mixed(4), grid) - 1.0) < 1e-7);
  });

  // Final state rho(t) from the master equation, every output time.
  Operator rho0 = Operator::Zero(4, 4);
  rho0 << 0.2790832323, -0.0266959918, 0.0246248117, -0.0025197522,  //
      -0.0266959918, 0.2569224128, -0.0024339119, 0.0250782265,      //
      0.0246248117, -0.0024339119, 0.2176070434, -0.0230928867,      //
      -0.0025197522, 0.0250782265, -0.0230928867, 0.2463873115;
  const DensityMatrix r0 = DensityMatrix::from_operator(rho0);
  const std::vector<Operator> rho_t = evolve_density(m, r0, grid).rho;
  for (double v : ft_functional_series(m, r0, rho_t, grid)) CHECK(std::abs(v - 1.0) < 1e-7);

  // Pure (rank-deficient) initial state.
  const DensityMatrix pure = DensityMatrix::pure(gen::Source(35).ket(4));
  CHECK(std::abs(ft_functional(m, pure, DensityMatrix::maximally_mixed(4), grid) - 1.0) < 1e-7);

  std::vector<Operator> bad = constant(0.5 * identity(4), grid.output_steps().size());
  CHECK_THROWS_AS(ft_functional_series(m, r0, bad, grid), Error);
  CHECK_THROWS_AS(ft_functional_series(m, r0, std::vector<Operator>(1, identity(4) / 4.0), grid), Error);
}

TEST_CASE("Jarzynski equality against closed-form partition functions") {
  const TimeGrid grid = TimeGrid::covering(15.0, 0.005, 3000);
  SUBCASE("J=0, h: 0 -> 0.4") {
    const JarzynskiExact j = jarzynski_lhs(build_two_spin_model(params(0.0, 1.0, 0.0, 0.4)), 1.0, grid);
    const double oracle = std::pow(2.0 * std::cosh(0.4), 2) / 4.0;
    CHECK(oracle == doctest::Approx(1.168717473).epsilon(1e-9));
    CHECK(std::abs(j.rhs.back() - oracle) < 1e-12);
    CHECK(std::abs(j.lhs.back() - oracle) < 1e-6);
    CHECK(std::abs(j.lhs_jump_basis.back() - oracle) < 1e-6);
  }
  SUBCASE("no driving") {
    const JarzynskiExact j = jarzynski_lhs(build_two_spin_model(params(0.2, 1.0)), 1.0, grid);
    for (std::size_t k = 0; k < j.lhs.size(); ++k) {
      CHECK(std::abs(j.lhs[k] - 1.0) < 1e-6);
      CHECK(std::abs(j.rhs[k] - 1.0) < 1e-12);
    }
  }
  SUBCASE("J=0.2, h: 0 -> 0.4") {
    auto z = [](double J, double h) {
      const double r = std::sqrt(4 * h * h + J * J);
      return 2.0 * std::cosh(r) + 2.0 * std::cosh(J);
    };
    const double oracle = z(0.2, 0.4) / z(0.2, 0.0);
    CHECK(oracle == doctest::Approx(1.166480264).epsilon(1e-9));
    const JarzynskiExact j = jarzynski_lhs(build_two_spin_model(params(0.2, 1.0, 0.0, 0.4)), 1.0, grid);
    for (std::size_t k = 0; k < j.lhs.size(); ++k) {
      const double h = 0.4 * j.times[k] / 15.0;
      CHECK(std::abs(j.rhs[k] - z(0.2, h) / z(0.2, 0.0)) < 1e-12);
      CHECK(std::abs(j.lhs[k] - j.rhs[k]) < 1e-6);
    }
  }
  CHECK_THROWS_AS(jarzynski_lhs(build_two_spin_model(params(0.0, 1.2)), 1.0, grid), Error);
  CHECK_THROWS_AS(jarzynski_lhs(build_two_spin_model(params(0.0, 1.0)), -1.0, grid), Error);
}

TEST_CASE("generating function: normalization, convexity and the second law") {
  const LindbladModel m = build_two_spin_model(params(0.1, 1.2));
  const TimeGrid grid = TimeGrid::covering(15.0, 0.01, 150);
  gen::for_all(3, 36, [&](gen::Source& s, int) {
    const DensityMatrix rho0 = DensityMatrix::from_operator(s.density(4));
    for (double v : generating_function(m, rho0, 0.0, grid)) CHECK(std::abs(v - 1.0) < 1e-10);

    std::vector<std::vector<double>> gf;
    const std::vector<double> xis{-0.5, 0.0, 0.5, 1.0, 1.5};
    for (double xi : xis) gf.push_back(generating_function(m, rho0, xi, grid));
    for (std::size_t k = 0; k < gf[0].size(); ++k) {
      for (std::size_t i = 1; i + 1 < xis.size(); ++i) {
        CHECK(gf[i - 1][k] + gf[i + 1][k] - 2.0 * gf[i][k] >= -1e-12);
      }
    }

    const std::vector<double> mean_sb = mean_bath_entropy(m, rho0, grid);
    const StateSeries series = evolve_density(m, rho0, grid);
    const double s0 = von_neumann_entropy(rho0.matrix());
    for (std::size_t k = 0; k < mean_sb.size(); ++k) {
      CHECK(mean_sb[k] + von_neumann_entropy(series.rho[k]) - s0 >= -1e-6);
    }
  });
}
