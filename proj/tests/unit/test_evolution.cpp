#include <doctest.h>

#include <cmath>
#include <numbers>

#include "collapse/dissipator.hpp"
#include "collapse/errors.hpp"
#include "collapse/evolution.hpp"
#include "support/generators.hpp"

using namespace collapse;
using collapse::testing::random_density_entries;
using collapse::testing::random_rate_table;

namespace {

constexpr double kPi = std::numbers::pi;

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

MeasurementModel figure_model(double gamma, double epsilon = kDefaultEpsilon) {
  return spin_half_scenario(0.37 * kPi, 0.65 * kPi, gamma, 1.0, epsilon);
}

MeasurementModel without_hamiltonian(const MeasurementModel& m) {
  const auto n = static_cast<Eigen::Index>(m.combined_dim());
  return MeasurementModel(m.sys(), m.app(), m.correspondence(), m.gamma(), m.omega(), m.epsilon(),
                          ComplexMatrix::Zero(n, n));
}

IntegratorConfig horizon(double t_max) {
  IntegratorConfig cfg;
  cfg.t_max = t_max;
  return cfg;
}

}  // namespace

TEST_CASE("master_rhs") {
  const auto m = figure_model(5.0);
  const DissipatorSpec spec = lindblad_jump_family(m.rates(), m.gamma(), m.omega());
  const DensityMatrix rho0 = m.initial_dm();

  SUBCASE("zero hamiltonian leaves only the dissipator") {
    const ComplexMatrix a = master_rhs(ComplexMatrix::Zero(4, 4), spec, rho0);
    CHECK(max_abs(a - apply_dissipator(spec, rho0)) == 0.0);
  }
  SUBCASE("eigenprojector of H with no dissipator is stationary") {
    const DissipatorSpec empty(4, {});
    CHECK(max_abs(master_rhs(m.hamiltonian(), empty, rho0)) < 1e-14);
  }
  SUBCASE("initial speed of the figure scenario") {
    const ComplexMatrix rhs = master_rhs(m.hamiltonian(), spec, rho0);
    const double scale = max_abs(rhs);
    CHECK(std::abs(rhs.trace()) <= 1e-12 * scale);
    CHECK(max_hermiticity_error(rhs) <= 1e-12 * scale);
    double ss = 0.0;
    for (Eigen::Index k = 0; k < 4; ++k) ss += std::norm(rhs(k, k));
    // numpy oracle on the same generator (tests/oracles/freeze_values.py)
    CHECK(std::sqrt(ss / 4.0) == doctest::Approx(10262.183217753442).epsilon(1e-12));
  }
  CHECK_THROWS_AS(master_rhs(ComplexMatrix::Zero(3, 3), spec, rho0), ValidationError);
}

TEST_CASE("integrator configuration is validated") {
  IntegratorConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.t_max = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.safety = 0.6;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.dt = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.record_every = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("sample schedule") {
  const auto m = figure_model(5.0, 1e-2);
  IntegratorConfig cfg = horizon(0.5);
  const Trajectory traj = simulate_model(m, cfg);
  const auto& s = traj.samples();
  CHECK(s.front().t == 0.0);
  CHECK(s.back().t == 0.5);
  for (std::size_t k = 1; k < s.size(); ++k) REQUIRE(s[k].t > s[k - 1].t);
  CHECK(s.size() >= cfg.samples);
  CHECK(traj.tracked().size() == 6);
  CHECK(traj.dim() == 4);
  CHECK(traj.stats().dt * static_cast<double>(traj.stats().steps) == doctest::Approx(0.5));
  // AUTO step
  const double w_max = lindblad_jump_family(m.rates(), 5.0, 1.0).max_weight() + 2.0 * 1.0;
  CHECK(traj.stats().dt <= kDefaultSafety / w_max * (1 + 1e-12));

  cfg.record_every = 7;
  cfg.log_samples = 0;
  const Trajectory strided = simulate_model(m, cfg);
  const std::size_t steps = strided.stats().steps;
  CHECK(strided.samples().size() == (steps / 7 + 1) + (steps % 7 ? 1 : 0));
}

TEST_CASE("full run converges to the Born-aligned state") {
  const auto m = spin_half_scenario(0.3, 0.65 * kPi, 5.0, 1.0, 1e-3);
  const Trajectory traj = simulate_model(m, horizon(2.0));
  const DensityMatrix target = m.target_dm();
  CHECK(trace_distance(traj.final_sample().rho, target) < 1e-3);
  const auto p = m.probabilities();
  CHECK(std::abs(traj.final_sample().diagonals[0] - m.rates().squared()[0] / 1.0) < 1e-3);
  CHECK(std::abs(traj.final_sample().diagonals[0] - p[0]) < 1e-3);
  CHECK(std::abs(traj.final_sample().diagonals[3] - p[1]) < 1e-3);
  const auto& st = traj.stats();
  CHECK(st.max_trace_error < 1e-9);
  CHECK(st.max_hermiticity_error < 1e-10);
  CHECK(st.min_eigenvalue > -1e-8);
}

TEST_CASE("RK4 converges at fourth order") {
  // Mild rates so that the step sizes below are well inside the asymptotic regime.
  const RateTable r(2, 2, {0.6, 0.3, 0.2, 0.5}, 0.1);
  const DissipatorSpec spec = lindblad_jump_family(r, 1.0, 1.0);
  const DensityMatrix rho0(random_density_entries(4));
  ComplexMatrix h = random_density_entries(4);  // any Hermitian matrix
  IntegratorConfig cfg = horizon(1.0);
  cfg.log_samples = 0;

  auto final_diag = [&](double dt) {
    cfg.dt = dt;
    return integrate(rho0, h, spec, cfg).final_sample().rho.matrix().diagonal().eval();
  };
  const auto reference = final_diag(1.0 / 2048);
  std::vector<double> errs;
  const std::vector<double> steps{1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
  for (double dt : steps) errs.push_back((final_diag(dt) - reference).norm());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const double x = std::log(steps[k]), y = std::log(errs[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(steps.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope >= 3.5);
}

TEST_CASE("integration failure paths") {
  const auto m = figure_model(5.0, 1e-2);
  IntegratorConfig cfg = horizon(0.2);
  cfg.dt = 0.05;  // far beyond the stability limit of the stiffest rates
  CHECK_THROWS_AS(simulate_model(m, cfg), IntegrationError);
  CHECK_THROWS_AS(integrate(m.initial_dm(), m.hamiltonian(), DissipatorSpec(3, {}), horizon(1.0)),
                  ValidationError);
}

TEST_CASE("fast-limit rates") {
  const double eps = 1e-4;
  const std::vector<double> p{0.5, eps * eps, eps * eps, 0.5};
  const double rate = fast_offdiag_rate(p[0], p[3], p, 1.0, 1.0);
  CHECK(rate == doctest::Approx(1.0 + 2.0 * std::sqrt(2.0) * eps).epsilon(1e-14));
  const std::vector<double> p_limit{0.5, 1e-30, 1e-30, 0.5};
  CHECK(fast_offdiag_rate(0.5, 0.5, p_limit, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));

  for (int trial = 0; trial < 200; ++trial) {
    const RateTable r = random_rate_table(2, 3, 1e-4);
    const auto q = r.squared();
    for (std::size_t a = 0; a < q.size(); ++a) {
      for (std::size_t b = a + 1; b < q.size(); ++b) {
        const double ab = fast_offdiag_rate(q[a], q[b], q, 2.0, 1.5);
        REQUIRE(ab > 0.0);
        REQUIRE(ab == doctest::Approx(fast_offdiag_rate(q[b], q[a], q, 2.0, 1.5)).epsilon(1e-15));
      }
    }
  }

  const std::vector<double> fixture{0.5, 1e-8, 1e-8, 0.5};
  const std::vector<double> d0{1.0, 0.0, 0.0, 0.0};
  const auto out = fast_diag_rhs(fixture, d0, 1.0, 1.0);
  // direct substitution, tests/oracles/freeze_values.py
  CHECK(out[0] == doctest::Approx(-1.0002828427124744).epsilon(1e-13));
  CHECK(out[1] == doctest::Approx(0.0001414213562373095).epsilon(1e-13));
  CHECK(out[2] == doctest::Approx(0.0001414213562373095).epsilon(1e-13));
  CHECK(out[3] == doctest::Approx(1.0).epsilon(1e-13));

  for (int trial = 0; trial < 200; ++trial) {
    const auto q = random_rate_table(2, 2, 1e-4).squared();
    double total = 0.0;
    for (double v : q) total += v;
    std::vector<double> pn(q);
    for (double& v : pn) v /= total;
    std::vector<double> d;
    for (const Complex c : collapse::testing::random_amplitudes(4)) d.push_back(std::norm(c));
    const auto rhs = fast_diag_rhs(pn, d, 3.0, 1.0);
    double s = 0.0, scale = 0.0;
    for (double v : rhs) {
      s += v;
      scale = std::max(scale, std::abs(v));
    }
    REQUIRE(std::abs(s) <= 1e-12 * std::max(1.0, scale));
    const auto at_p = fast_diag_rhs(pn, pn, 3.0, 1.0);
    for (double v : at_p) REQUIRE(std::abs(v) <= 1e-12 * 3.0);
  }
}

TEST_CASE("fast-limit trajectory") {
  const auto m = figure_model(5.0);
  const auto p_all = m.rates().squared();
  const DensityMatrix rho0 = m.initial_dm();
  const Trajectory traj = integrate_fast_limit(rho0, p_all, 5.0, 1.0, horizon(2.0), m.target_dm());

  for (std::size_t k = 0; k < traj.tracked().size(); ++k) {
    const auto [r, s] = traj.tracked()[k];
    const double rate = fast_offdiag_rate(p_all[static_cast<std::size_t>(r)],
                                          p_all[static_cast<std::size_t>(s)], p_all, 5.0, 1.0);
    double previous = std::abs(rho0(r, s)) + 1.0;
    for (const auto& smp : traj.samples()) {
      const Complex expected = rho0(r, s) * std::exp(-rate * smp.t);
      REQUIRE(std::abs(smp.off_diagonals[k] - expected) <= 1e-12);
      REQUIRE(smp.off_diagonals[k].imag() == 0.0);
      REQUIRE(std::abs(smp.off_diagonals[k]) <= previous);
      previous = std::abs(smp.off_diagonals[k]);
    }
  }
  const auto& last = traj.final_sample();
  CHECK(std::abs(last.diagonals[0] - m.probabilities()[0]) < 1e-3);
  CHECK(std::abs(last.diagonals[3] - m.probabilities()[1]) < 1e-3);
  CHECK(traj.stats().max_trace_error < 1e-9);
}

TEST_CASE("fast limit approaches the full equation as gamma grows") {
  // Each run covers the same G*W*t horizon.
  auto discrepancy = [](double gamma) {
    const auto m = figure_model(gamma, 1e-3);
    IntegratorConfig cfg = horizon(10.0 / gamma);
    const Trajectory full = simulate_model(m, cfg, EvolutionMode::Full);
    const Trajectory fast = simulate_model(m, cfg, EvolutionMode::Fast);
    REQUIRE(full.samples().size() == fast.samples().size());
    double worst = 0.0;
    for (std::size_t k = 0; k < full.samples().size(); ++k) {
      for (std::size_t d = 0; d < 4; ++d) {
        worst = std::max(worst, std::abs(full.samples()[k].diagonals[d] - fast.samples()[k].diagonals[d]));
      }
    }
    return std::pair{worst, full.final_sample().diagonals};
  };
  const auto [d5, final5] = discrepancy(5.0);
  const auto [d50, final50] = discrepancy(50.0);
  CHECK(d50 < 1e-2);
  CHECK(d50 < d5);
  (void)final5;
  (void)final50;
}

TEST_CASE("fast and full final diagonals agree at gamma 50 with the default floor") {
  const auto m = figure_model(50.0);
  const IntegratorConfig cfg = horizon(0.1);
  const auto full = simulate_model(m, cfg, EvolutionMode::Full).final_sample().diagonals;
  const auto fast = simulate_model(m, cfg, EvolutionMode::Fast).final_sample().diagonals;
  for (std::size_t d = 0; d < 4; ++d) CHECK(std::abs(full[d] - fast[d]) < 1e-2);
}

TEST_CASE("hamiltonian modulates the coherences") {
  const auto m = figure_model(5.0, 1e-3);
  const IntegratorConfig cfg = horizon(0.5);
  const Trajectory with_h = simulate_model(m, cfg);
  const Trajectory no_h = simulate_model(without_hamiltonian(m), cfg);
  double max_imag_h = 0.0, max_imag_0 = 0.0;
  for (const auto& smp : with_h.samples()) {
    for (const auto& v : smp.off_diagonals) max_imag_h = std::max(max_imag_h, std::abs(v.imag()));
  }
  for (const auto& smp : no_h.samples()) {
    for (const auto& v : smp.off_diagonals) max_imag_0 = std::max(max_imag_0, std::abs(v.imag()));
  }
  CHECK(max_imag_h > 1e-4);
  CHECK(max_imag_0 <= 1e-12);
}

TEST_CASE("full run without hamiltonian decays coherences exponentially") {
  const auto m = without_hamiltonian(figure_model(5.0, 1e-3));
  const auto p_all = m.rates().squared();
  const Trajectory traj = simulate_model(m, horizon(0.5));
  const DensityMatrix rho0 = m.initial_dm();
  for (std::size_t k = 0; k < traj.tracked().size(); ++k) {
    const auto [r, s] = traj.tracked()[k];
    const double rate = fast_offdiag_rate(p_all[static_cast<std::size_t>(r)],
                                          p_all[static_cast<std::size_t>(s)], p_all, 5.0, 1.0);
    for (const auto& smp : traj.samples()) {
      REQUIRE(std::abs(smp.off_diagonals[k] - rho0(r, s) * std::exp(-rate * smp.t)) <= 1e-6);
    }
  }
}

TEST_CASE("alignment time") {
  const auto m = figure_model(5.0, 1e-3);
  SUBCASE("already aligned") {
    const DensityMatrix target = m.target_dm();
    const RateTable r = m.rates();
    const Trajectory traj = integrate(target, ComplexMatrix::Zero(4, 4),
                                      lindblad_jump_family(r, 5.0, 1.0), horizon(0.01), target);
    CHECK(alignment_time(traj, target, 0.01) == 0.0);
  }
  SUBCASE("not reached within the horizon") {
    const Trajectory traj = simulate_model(m, horizon(0.01));
    try {
      (void)alignment_time(traj, m.target_dm(), 0.01);
      FAIL("expected NotAlignedError");
    } catch (const NotAlignedError& e) {
      CHECK(e.final_distance() > 0.01);
      CHECK(e.final_distance() == doctest::Approx(traj.final_sample().trace_distance));
    }
  }
  SUBCASE("stays below tolerance after the reported time") {
    const Trajectory traj = simulate_model(m, horizon(1.5));
    const double tau = alignment_time(traj, m.target_dm(), 0.01);
    CHECK(tau > 0.0);
    for (const auto& smp : traj.samples()) {
      if (smp.t >= tau) REQUIRE(smp.trace_distance <= 0.01);
    }
  }
}

TEST_CASE("entropy series of the figure scenario") {
  const auto m = figure_model(5.0);
  const Trajectory traj = simulate_model(m, horizon(1.0));
  const auto& s = traj.samples();
  CHECK(s.front().entropy < 1e-6);
  const auto p = m.probabilities();
  const double born = -p[0] * std::log(p[0]) - p[1] * std::log(p[1]);
  CHECK(std::abs(s.back().entropy - born) < 2e-3);
  // A transient hump right after the start, well before the plateau.
  bool local_max = false;
  for (std::size_t k = 1; k + 1 < s.size(); ++k) {
    if (s[k].entropy > s[k - 1].entropy && s[k].entropy > s[k + 1].entropy) local_max = true;
  }
  CHECK(local_max);
  const auto& st = traj.stats();
  CHECK(st.max_trace_error < 1e-9);
  CHECK(st.max_hermiticity_error < 1e-10);
  CHECK(st.min_eigenvalue > -1e-8);
}
