#include "doctest.h"

#include <cmath>

#include "masr/uncertainty.hpp"
#include "test_support.hpp"

using namespace masr;
using namespace testsupport;

namespace {

ChannelSet random_channels(Rng& rng, int M = 8, int K = 4) {
  ChannelSet ch;
  ch.H_r = random_cmat(M, K, rng, 1e-3);
  ch.h_s = random_cvec(M, rng, 1e-3);
  ch.H_bs = ch.h_s.conjugate().asDiagonal() * ch.H_r;
  ch.h_u = random_cvec(K, rng, 1e-4);
  return ch;
}

}  // namespace

TEST_CASE("radii scale with the channel norms") {
  Rng rng(1);
  const ChannelSet ch = random_channels(rng);
  const auto m = UncertaintyModel::derive(0.05, 0.1, ch);
  CHECK(m.xi_bs == doctest::Approx(0.05 * ch.H_bs.norm()));
  CHECK(m.xi_u == doctest::Approx(0.1 * ch.h_u.norm()));
  CHECK_THROWS_AS(UncertaintyModel::derive(-0.1, 0.1, ch), std::invalid_argument);

  ChannelSet doubled = ch;
  doubled.H_bs *= 2.0;
  doubled.h_u *= 3.0;
  const auto r = m.rederive(doubled);
  CHECK(r.g_bs == m.g_bs);
  CHECK(r.xi_bs == doctest::Approx(2.0 * m.xi_bs));
  CHECK(r.xi_u == doctest::Approx(3.0 * m.xi_u));
}

TEST_CASE("zero radii give zero perturbations") {
  Rng rng(2);
  UncertaintyModel m;
  m.xi_bs = 0.0;
  m.xi_u = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Perturbation p = sample_perturbation(m, 8, 4, rng);
    CHECK(p.H_bs.norm() == 0.0);
    CHECK(p.h_u.norm() == 0.0);
  }
}

TEST_CASE("boundary draws land on the spheres and interior draws inside") {
  Rng rng(3);
  UncertaintyModel m;
  m.xi_bs = 0.7;
  m.xi_u = 0.2;
  for (int t = 0; t < 200; ++t) {
    const Perturbation p = sample_perturbation(m, 8, 4, rng, {1.0});
    CHECK(p.H_bs.norm() == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(p.h_u.norm() == doctest::Approx(0.2).epsilon(1e-12));
  }
  int inner = 0;
  for (int t = 0; t < 10000; ++t) {
    const Perturbation p = sample_perturbation(m, 8, 4, rng);
    CHECK(p.H_bs.norm() <= 0.7 * (1 + 1e-12));
    CHECK(p.h_u.norm() <= 0.2 * (1 + 1e-12));
    if (p.h_u.norm() < 0.2 * (1 - 1e-9)) ++inner;
  }
  // half the h_u draws are interior
  CHECK(inner == doctest::Approx(5000).epsilon(0.05));
}

TEST_CASE("direct worst cases agree with a projected-gradient oracle") {
  Rng rng(4);
  for (int t = 0; t < 12; ++t) {
    const cvec h = random_cvec(4, rng);
    const cvec w = random_cvec(4, rng);
    // small, medium and clamping radii
    const double xi = (t % 3 == 0 ? 0.05 : t % 3 == 1 ? 0.4 : 3.0) * h.norm();
    const Balls b{{8}, {xi}};
    auto amp = [&](const Eigen::VectorXd& x) {
      return std::abs((h + as_cmat(x, 0, 4, 1).col(0)).dot(w));
    };
    const double lo = ball_minimize(amp, b, rng);
    const double hi = -ball_minimize([&](const Eigen::VectorXd& x) { return -amp(x); }, b, rng);
    const double scale = h.norm() * w.norm();
    CHECK(std::abs(worst_case_direct_amplitude(h, w, xi, Sense::min) - lo) <= 1e-3 * scale);
    CHECK(std::abs(worst_case_direct_amplitude(h, w, xi, Sense::max) - hi) <= 1e-3 * scale);
  }
}

TEST_CASE("cascaded worst cases agree with a projected-gradient oracle") {
  Rng rng(5);
  for (int t = 0; t < 8; ++t) {
    const cmat H = random_cmat(3, 2, rng);
    const cvec psi = random_phases(3, rng);
    const cvec w = random_cvec(2, rng);
    const double xi = (t % 2 == 0 ? 0.1 : 1.5) * H.norm();
    const Balls b{{12}, {xi}};
    auto amp = [&](const Eigen::VectorXd& x) {
      return std::abs(psi.dot((H + as_cmat(x, 0, 3, 2)) * w));
    };
    const double lo = ball_minimize(amp, b, rng);
    const double hi = -ball_minimize([&](const Eigen::VectorXd& x) { return -amp(x); }, b, rng);
    const double scale = H.norm() * psi.norm() * w.norm();
    CHECK(std::abs(worst_case_cascaded_amplitude(H, psi, w, xi, Sense::min) - lo) <= 1e-3 * scale);
    CHECK(std::abs(worst_case_cascaded_amplitude(H, psi, w, xi, Sense::max) - hi) <= 1e-3 * scale);
  }
}

TEST_CASE("combined worst case agrees with an oracle over both balls") {
  Rng rng(6);
  for (int t = 0; t < 8; ++t) {
    const cvec h = random_cvec(2, rng);
    const cmat H = random_cmat(3, 2, rng, 0.5);
    const cvec psi = random_phases(3, rng);
    const cvec w = random_cvec(2, rng);
    const double xu = 0.1 * h.norm() * (1 + t % 3), xb = 0.1 * H.norm() * (1 + t % 2);
    for (int sign : {1, -1}) {
      const Balls b{{4, 12}, {xu, xb}};
      auto amp = [&](const Eigen::VectorXd& x) {
        const cvec du = as_cmat(x, 0, 2, 1).col(0);
        const cmat dB = as_cmat(x, 4, 3, 2);
        return std::abs((h + du).dot(w) + double(sign) * psi.dot((H + dB) * w));
      };
      const double lo = ball_minimize(amp, b, rng);
      const double scale = (h.norm() + H.norm() * psi.norm()) * w.norm();
      CHECK(std::abs(worst_case_combined_amplitude(h, H, psi, w, xu, xb, sign) - lo) <=
            1e-3 * scale);
    }
  }
}

TEST_CASE("sampled amplitudes stay inside the closed-form envelope") {
  Rng rng(7);
  const ChannelSet ch = random_channels(rng);
  const auto m = UncertaintyModel::derive(0.05, 0.1, ch);
  const cvec psi = random_phases(8, rng);
  const cvec w = random_cvec(4, rng);
  const double dlo = worst_case_direct_amplitude(ch.h_u, w, m.xi_u, Sense::min);
  const double dhi = worst_case_direct_amplitude(ch.h_u, w, m.xi_u, Sense::max);
  const double clo = worst_case_cascaded_amplitude(ch.H_bs, psi, w, m.xi_bs, Sense::min);
  const double chi = worst_case_cascaded_amplitude(ch.H_bs, psi, w, m.xi_bs, Sense::max);
  const double comb = worst_case_combined_amplitude(ch.h_u, ch.H_bs, psi, w, m.xi_u, m.xi_bs, 1);
  for (int t = 0; t < 10000; ++t) {
    const Perturbation p = sample_perturbation(m, 8, 4, rng);
    const double d = std::abs((ch.h_u + p.h_u).dot(w));
    const cd c = psi.dot((ch.H_bs + p.H_bs) * w);
    CHECK(d >= dlo * (1 - 1e-12));
    CHECK(d <= dhi * (1 + 1e-12));
    CHECK(std::abs(c) >= clo * (1 - 1e-12));
    CHECK(std::abs(c) <= chi * (1 + 1e-12));
    CHECK(std::abs((ch.h_u + p.h_u).dot(w) + c) >= comb * (1 - 1e-12));
  }
}

TEST_CASE("worst-case direct amplitude falls with slope ||w|| until it clamps") {
  Rng rng(8);
  const cvec h = random_cvec(4, rng), w = random_cvec(4, rng);
  const double a = std::abs(h.dot(w)), wn = w.norm();
  const double knee = a / wn;
  for (double f : {0.1, 0.3, 0.6, 0.9}) {
    const double x1 = f * knee, x2 = x1 + 0.05 * knee;
    const double s = (worst_case_direct_amplitude(h, w, x2, Sense::min) -
                      worst_case_direct_amplitude(h, w, x1, Sense::min)) /
                     (x2 - x1);
    CHECK(s == doctest::Approx(-wn).epsilon(1e-9));
  }
  CHECK(worst_case_direct_amplitude(h, w, 1.01 * knee, Sense::min) == 0.0);
  CHECK(worst_case_direct_amplitude(h, w, 10 * knee, Sense::min) == 0.0);
}

TEST_CASE("combined worst case clamps at zero for large radii") {
  Rng rng(9);
  const cvec h = random_cvec(4, rng), w = random_cvec(4, rng);
  const cmat H = random_cmat(8, 4, rng);
  const cvec psi = random_phases(8, rng);
  CHECK(worst_case_combined_amplitude(h, H, psi, w, 100 * h.norm(), 0.0, 1) == 0.0);
  CHECK(worst_case_combined_amplitude(h, H, psi, w, 0.0, 100 * H.norm(), -1) == 0.0);
  const double nominal = std::abs(h.dot(w) - psi.dot(H * w));
  CHECK(worst_case_combined_amplitude(h, H, psi, w, 0.0, 0.0, -1) == doctest::Approx(nominal));
}

TEST_CASE("extremal perturbations lie in the balls and attain the closed forms") {
  Rng rng(10);
  for (int t = 0; t < 50; ++t) {
    const cvec h = random_cvec(4, rng), w = random_cvec(4, rng);
    const cmat H = random_cmat(8, 4, rng);
    const cvec psi = random_phases(8, rng);
    const double xu = (t % 2 ? 0.1 : 5.0) * h.norm();
    const double xb = (t % 2 ? 0.1 : 5.0) * H.norm();
    for (Sense s : {Sense::min, Sense::max}) {
      const cvec du = extremal_direct_perturbation(h, w, xu, s);
      CHECK(du.norm() <= xu * (1 + 1e-12));
      CHECK(std::abs((h + du).dot(w)) ==
            doctest::Approx(worst_case_direct_amplitude(h, w, xu, s)).epsilon(1e-9).scale(
                h.norm() * w.norm()));
      const cmat dB = extremal_cascaded_perturbation(H, psi, w, xb, s);
      CHECK(dB.norm() <= xb * (1 + 1e-12));
      CHECK(std::abs(psi.dot((H + dB) * w)) ==
            doctest::Approx(worst_case_cascaded_amplitude(H, psi, w, xb, s))
                .epsilon(1e-9)
                .scale(H.norm() * psi.norm() * w.norm()));
    }
  }
}

TEST_CASE("relaxed psi norm only widens the cascaded spread") {
  Rng rng(11);
  const cmat H = random_cmat(8, 4, rng);
  const cvec psi = random_phases(8, rng), w = random_cvec(4, rng);
  const double xb = 0.05 * H.norm();
  CHECK(worst_case_cascaded_amplitude(H, psi, w, xb, Sense::max, psi.norm()) ==
        worst_case_cascaded_amplitude(H, psi, w, xb, Sense::max));
  CHECK(worst_case_cascaded_amplitude(H, psi, w, xb, Sense::max, 2 * psi.norm()) >
        worst_case_cascaded_amplitude(H, psi, w, xb, Sense::max));
}
