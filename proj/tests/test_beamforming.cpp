#include "doctest.h"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "masr/beamforming.hpp"
#include "masr/driver.hpp"
#include "test_support.hpp"

using namespace masr;
using namespace testsupport;

namespace {

double min_eig(const Eigen::MatrixXd& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// The min-eigenvalue of an LMI is concave in any one variable; ternary search
// over variable `idx` in [0, hi].
double best_over(const LmiBlock& b, Eigen::VectorXd z, int idx, double hi) {
  double lo = 0.0;
  auto f = [&](double v) {
    z(idx) = v;
    return min_eig(b.evaluate(z));
  };
  for (int it = 0; it < 300; ++it) {
    const double a = lo + (hi - lo) / 3, c = hi - (hi - lo) / 3;
    if (f(a) < f(c))
      lo = a;
    else
      hi = c;
  }
  return f(0.5 * (lo + hi));
}

cd amplitude_value(const Amplitude& a, const Eigen::VectorXd& z, const cvec& x) {
  return a.alpha.evaluate_scalar(z) + a.beta.evaluate(z).col(0).dot(x);
}

struct Start {
  std::vector<UserLink> links;
  ScenarioConfig sc;
  double p_max = 0.0;
  cvec w;
  std::vector<int> idx;
  bool ok = false;
};

Start feasible_start(Scenario scenario, std::uint64_t seed, int K = 4, int M = 8) {
  RunConfig cfg;
  cfg.scenario = scenario;
  cfg.antennas = K;
  cfg.propagation.ris_elements = M;
  const Instance inst(cfg, seed);
  Start s;
  s.sc = cfg.scenario_config();
  s.p_max = cfg.p_max_watt();
  s.links = inst.links(grid_positions(K, cfg.region(), cfg.d_min()));
  s.w = initial_beamformer(s.links, s.p_max);
  s.idx = polish_phases(s.links, s.sc, s.w, aligned_phases(s.links[0], s.w, cfg.levels),
                        cfg.levels);
  s.ok = make_secondary_feasible(s.links, s.sc, s.p_max, phases_from_indices(s.idx, cfg.levels),
                                 s.w);
  return s;
}

// Robust-rate bound holds and the secondary threshold is met on sampled errors.
void check_by_sampling(const Start& s, const cvec& w, const cvec& psi, Rng& rng, int n) {
  const UserLink& l = s.links[0];
  const double bound = robust_rate(s.sc, l.channels, w, psi, l.uncertainty);
  for (int i = 0; i < n; ++i) {
    const Perturbation d =
        sample_perturbation(l.uncertainty, l.channels.elements(), l.channels.antennas(), rng);
    CHECK(nominal_rate(s.sc, l.channels, w, psi, &d) >= bound - 1e-9);
    CHECK(secondary_snr(s.sc, l.channels, w, psi, &d) >= s.sc.secondary_threshold() * (1 - 1e-6));
  }
}

}  // namespace

TEST_CASE("SCA minorant is tangent at the expansion and below everywhere") {
  Rng rng(41);
  const int K = 3;
  const cvec h = random_cvec(K, rng);
  const cmat H = random_cmat(4, K, rng);
  const cvec psi = random_phases(4, rng);
  std::vector<int> re{0, 1, 2}, im{3, 4, 5};
  const AffineMatrix w = AffineMatrix::complex_vector(re, im);
  for (int sign : {1, -1}) {
    const Amplitude a = combined_amplitude(h, H, w, AffineMatrix(cmat(psi)), sign);
    const cvec wn = random_cvec(K, rng);
    Eigen::VectorXd zn(6);
    zn << wn.real(), wn.imag();
    const Amplitude e = combined_amplitude(h, H, AffineMatrix(cmat(wn)), AffineMatrix(cmat(psi)), sign);
    const QuadraticForm q = sca_minorant(a, e);
    for (int t = 0; t < 1000; ++t) {
      const cvec x = random_cvec(K + 4 * K, rng, 0.3);
      const cvec wz = random_cvec(K, rng);
      Eigen::VectorXd z(6);
      z << wz.real(), wz.imag();
      const double truth = std::norm(amplitude_value(a, z, x));
      CHECK(q.evaluate(z, x) <= truth + 1e-9 * (1 + truth));
      const double at = std::norm(amplitude_value(a, zn, x));
      CHECK(q.evaluate(zn, x) == doctest::Approx(at).epsilon(1e-10).scale(1 + at));
    }
  }
}

TEST_CASE("amplitude builders reproduce the perturbed channel products") {
  Rng rng(42);
  const cvec h = random_cvec(4, rng), w = random_cvec(4, rng);
  const cmat H = random_cmat(8, 4, rng);
  const cvec psi = random_phases(8, rng);
  const Eigen::VectorXd none;
  for (int t = 0; t < 20; ++t) {
    const cvec du = random_cvec(4, rng, 0.1);
    const cmat dH = random_cmat(8, 4, rng, 0.1);
    const Amplitude d = direct_amplitude(h, AffineMatrix(cmat(w)));
    CHECK(std::abs(std::conj(amplitude_value(d, none, du)) - (h + du).dot(w)) < 1e-12);
    const Amplitude c = cascaded_amplitude(H, AffineMatrix(cmat(w)), AffineMatrix(cmat(psi)));
    const cd cas = psi.dot((H + dH) * w);
    CHECK(std::abs(std::conj(amplitude_value(c, none, vectorize_conj(dH))) - cas) < 1e-12);
    const Amplitude m = combined_amplitude(h, H, AffineMatrix(cmat(w)), AffineMatrix(cmat(psi)), -1);
    cvec x(4 + 32);
    x << du, vectorize_conj(dH);
    CHECK(std::abs(std::conj(amplitude_value(m, none, x)) - ((h + du).dot(w) - cas)) < 1e-12);
  }
  CHECK_THROWS_AS(direct_amplitude(h, AffineMatrix(cmat(random_cvec(3, rng)))),
                  std::invalid_argument);
}

TEST_CASE("robust minorant block is tight at the expansion point") {
  Rng rng(43);
  for (int t = 0; t < 10; ++t) {
    const int K = 4;
    const cvec h = random_cvec(K, rng), wn = random_cvec(K, rng);
    const cmat H = random_cmat(8, K, rng, 0.3);
    const cvec psi = random_phases(8, rng);
    std::vector<int> re{0, 1, 2, 3}, im{4, 5, 6, 7};
    const AffineMatrix w = AffineMatrix::complex_vector(re, im);
    const int target = 8, mu = 9;
    Eigen::VectorXd z(10);
    z << wn.real(), wn.imag(), 0.0, 0.0;

    // direct link, one ball
    const double xu = 0.1 * h.norm();
    const double wc = std::max(std::abs(h.dot(wn)) - xu * wn.norm(), 0.0);
    REQUIRE(wc > 0.0);
    const LmiBlock bd = robust_minorant_block(
        direct_amplitude(h, w), direct_amplitude(h, AffineMatrix(cmat(wn))),
        AffineMatrix::variable(target), {{K, xu, mu}}, wc * wc, "direct");
    z(target) = 0.99 * wc * wc;
    CHECK(best_over(bd, z, mu, 100.0) >= 0.0);
    z(target) = 1.01 * wc * wc;
    CHECK(best_over(bd, z, mu, 100.0) < 0.0);

    // cascaded link, one ball
    const double xb = 0.05 * H.norm();
    const double cw = std::max(std::abs(psi.dot(H * wn)) - xb * psi.norm() * wn.norm(), 0.0);
    REQUIRE(cw > 0.0);
    const AffineMatrix P{cmat(psi)};
    const LmiBlock bc = robust_minorant_block(
        cascaded_amplitude(H, w, P), cascaded_amplitude(H, AffineMatrix(cmat(wn)), P),
        AffineMatrix::variable(target), {{8 * K, xb, mu}}, cw * cw, "cascaded");
    z(target) = 0.99 * cw * cw;
    CHECK(best_over(bc, z, mu, 100.0) >= 0.0);
    z(target) = 1.01 * cw * cw;
    CHECK(best_over(bc, z, mu, 100.0) < 0.0);
  }
}

TEST_CASE("robust minorant certificates over two balls are sound") {
  Rng rng(44);
  int certified = 0;
  for (int t = 0; t < 10; ++t) {
    const int K = 2, M = 3;
    const cvec h = random_cvec(K, rng), wn = random_cvec(K, rng);
    const cmat H = random_cmat(M, K, rng, 0.3);
    const cvec psi = random_phases(M, rng);
    std::vector<int> re{0, 1}, im{2, 3};
    const AffineMatrix w = AffineMatrix::complex_vector(re, im);
    const AffineMatrix P{cmat(psi)};
    const double xu = 0.05 * h.norm(), xb = 0.05 * H.norm();
    const int sign = t % 2 ? 1 : -1;
    const double wc = worst_case_combined_amplitude(h, H, psi, wn, xu, xb, sign);
    REQUIRE(wc > 0.0);
    const LmiBlock b = robust_minorant_block(
        combined_amplitude(h, H, w, P, sign), combined_amplitude(h, H, AffineMatrix(cmat(wn)), P, sign),
        AffineMatrix::variable(4), {{K, xu, 5}, {M * K, xb, 6}}, wc * wc, "combined");
    // the target the certificate can reach at the expansion point
    Eigen::VectorXd z(7);
    z << wn.real(), wn.imag(), 0.0, 0.0, 0.0;
    double best_target = 0.0;
    for (double f : {0.5, 0.7, 0.8, 0.9, 0.95, 0.99}) {
      z(4) = f * wc * wc;
      double e = -1e300;
      for (int i = 0; i <= 60; ++i)
        for (int j = 0; j <= 60; ++j) {
          z(5) = 0.05 * i;
          z(6) = 0.05 * j;
          e = std::max(e, min_eig(b.evaluate(z)));
        }
      if (e >= 0.0) best_target = z(4);
    }
    if (best_target == 0.0) continue;
    ++certified;
    for (int s = 0; s < 2000; ++s) {
      cvec du = random_cvec(K, rng);
      cmat dH = random_cmat(M, K, rng);
      du *= xu / du.norm();
      dH *= xb / dH.norm() * (s % 3 ? 1.0 : 0.5);
      const double v = std::norm((h + du).dot(wn) + double(sign) * psi.dot((H + dH) * wn));
      CHECK(v >= best_target * (1 - 1e-9));
    }
  }
  CHECK(certified >= 5);
}

TEST_CASE("interference block is tight for the closed-form bound") {
  Rng rng(45);
  for (int t = 0; t < 10; ++t) {
    const int K = 3, M = 4;
    const cvec w = random_cvec(K, rng);
    const cd ghat = random_cvec(1, rng)(0);
    const double xi = 0.1, psq = M;
    const double bound = std::pow(std::abs(ghat) + xi * w.norm() * std::sqrt(psq), 2);
    const LmiBlock b = interference_block(AffineMatrix::variable(0), AffineMatrix(cmat::Constant(1, 1, ghat)),
                                          AffineMatrix(cmat(w)), xi, psq, 1, std::sqrt(bound), "eps");
    Eigen::VectorXd z(2);
    z << 1.01 * bound, 0.0;
    CHECK(best_over(b, z, 1, 100.0) >= 0.0);
    z(0) = 0.99 * bound;
    CHECK(best_over(b, z, 1, 100.0) < 0.0);
    // sampled interference never exceeds the bound
    for (int s = 0; s < 500; ++s) {
      cmat X = random_cmat(K, M, rng);
      X *= xi / X.norm();
      const cvec p = random_phases(M, rng);
      CHECK(std::norm(ghat + w.dot(X * p)) <= bound * (1 + 1e-12));
    }
  }
}

TEST_CASE("single-antenna transmit step reaches full power") {
  for (Scenario scen : {Scenario::psr, Scenario::csr}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      Start s = feasible_start(scen, seed, 1);
      s.sc.gamma_p_min = 0.0;
      s.sc.gamma_c_min = 0.0;
      const cvec psi = phases_from_indices(s.idx, 8);
      const cvec w0 = s.w * 0.3;
      const TransmitResult r = sca_transmit(s.links, s.sc, s.p_max, psi, w0);
      // with one antenna the bound rises with |w|, so the optimum is |w|^2 = P
      const cvec full = cvec::Constant(1, std::sqrt(s.p_max));
      const double best = robust_objective(s.sc, s.links, full, psi);
      CHECK(r.trace.back() == doctest::Approx(best).epsilon(1e-4));
      // PSR is interference limited here and nearly flat in |w|; only CSR pins the power
      if (scen == Scenario::csr) CHECK(r.w.norm() == doctest::Approx(std::sqrt(s.p_max)).epsilon(1e-3));
    }
  }
}

TEST_CASE("single-element passive step matches enumeration") {
  for (Scenario scen : {Scenario::psr, Scenario::csr}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      Start s = feasible_start(scen, seed, 4, 1);
      s.sc.gamma_p_min = 0.0;
      s.sc.gamma_c_min = 0.0;
      const PassiveResult r = sca_passive(s.links, s.sc, s.p_max, s.w, {0}, 8);
      double best = -1.0;
      for (int i = 0; i < 8; ++i)
        best = std::max(best, robust_objective(s.sc, s.links, s.w, phases_from_indices({i}, 8)));
      CHECK(robust_objective(s.sc, s.links, s.w, r.psi) == doctest::Approx(best).epsilon(1e-12));
    }
  }
}

TEST_CASE("SCA traces are monotone and the designs survive sampling") {
  Rng rng(46);
  for (Scenario scen : {Scenario::psr, Scenario::csr}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const Start s = feasible_start(scen, seed);
      REQUIRE(s.ok);
      const cvec psi0 = phases_from_indices(s.idx, 8);
      const TransmitResult tr = sca_transmit(s.links, s.sc, s.p_max, psi0, s.w);
      for (std::size_t i = 1; i < tr.trace.size(); ++i) CHECK(tr.trace[i] >= tr.trace[i - 1]);
      CHECK(tr.w.norm() <= std::sqrt(s.p_max) * (1 + 1e-9));
      CHECK(robust_secondary_ok(s.sc, s.links, tr.w, psi0));
      check_by_sampling(s, tr.w, psi0, rng, 300);

      const PassiveResult pr = sca_passive(s.links, s.sc, s.p_max, tr.w, s.idx, 8);
      for (std::size_t i = 1; i < pr.trace.size(); ++i) CHECK(pr.trace[i] >= pr.trace[i - 1]);
      // grid exactness: the phases are the discrete points themselves
      CHECK(pr.psi == phases_from_indices(pr.indices, 8));
      CHECK(robust_objective(s.sc, s.links, tr.w, pr.psi) >=
            robust_objective(s.sc, s.links, tr.w, psi0));
      CHECK(robust_secondary_ok(s.sc, s.links, tr.w, pr.psi));
      check_by_sampling(s, tr.w, pr.psi, rng, 300);
    }
  }
}

TEST_CASE("transmit subproblem keeps the expansion point feasible") {
  for (Scenario scen : {Scenario::psr, Scenario::csr}) {
    const Start s = feasible_start(scen, 2);
    REQUIRE(s.ok);
    const cvec psi = phases_from_indices(s.idx, 8);
    const TransmitProblem tp = scen == Scenario::psr
                                   ? build_psr_transmit_subproblem(s.links, s.sc, s.p_max, psi, s.w)
                                   : build_csr_transmit_subproblem(s.links, s.sc, s.p_max, psi, s.w);
    const ConicSolution sol = solve_conic(tp.problem);
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(tp.problem.check(sol.x).feasible());
    const cvec w = tp.beamformer(sol.x);
    CHECK(robust_objective(s.sc, s.links, w, psi) >=
          robust_objective(s.sc, s.links, s.w, psi) - 1e-6);
  }
}

TEST_CASE("index recovery") {
  Eigen::MatrixXd c(4, 3);
  c << 0.1, 0.25, 0.0,  //
      0.6, 0.25, 0.0,   //
      0.2, 0.25, 0.0,   //
      0.1, 0.25, 1.0;
  const auto idx = recover_indices(c);
  CHECK(idx == std::vector<int>{1, 0, 3});
  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(4, 3);
  for (int m = 0; m < 3; ++m) onehot(idx[m], m) = 1.0;
  CHECK(recover_indices(onehot) == idx);

  const PassiveExpansion e = expansion_from_selectors(onehot, 4);
  CHECK((e.psi - phases_from_indices(idx, 4)).norm() < 1e-15);
}

TEST_CASE("one PU makes the max-min objective the single-user rate") {
  for (Scenario scen : {Scenario::psr, Scenario::csr}) {
    const Start s = feasible_start(scen, 3);
    const cvec psi = phases_from_indices(s.idx, 8);
    const UserLink& l = s.links[0];
    CHECK(robust_objective(s.sc, s.links, s.w, psi) ==
          robust_rate(s.sc, l.channels, s.w, psi, l.uncertainty));
    const std::vector<UserLink> twice{l, l};
    CHECK(robust_objective(s.sc, twice, s.w, psi) == robust_objective(s.sc, s.links, s.w, psi));
    const TransmitResult a = sca_transmit(s.links, s.sc, s.p_max, psi, s.w);
    const TransmitResult b = sca_transmit(twice, s.sc, s.p_max, psi, s.w);
    CHECK(b.trace.back() == doctest::Approx(a.trace.back()).epsilon(1e-4));
  }
}
