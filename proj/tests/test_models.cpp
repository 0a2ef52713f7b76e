#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dif/models.hpp"

using namespace dif;

namespace {

Vector make5(double a, double b, double c, double d, double e) {
  Vector x(5);
  x << a, b, c, d, e;
  return x;
}

TdoaConfig unit_square_mics() {
  TdoaConfig cfg;
  cfg.mic_positions = {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0),
                       Eigen::Vector2d(0, 1), Eigen::Vector2d(1, 1)};
  return cfg;
}

}  // namespace

TEST_CASE("coordinated turn transition") {
  CoordinatedTurnConfig cfg{1.0, 1.0, 1.0};

  // ω → 0 limit is constant velocity
  const Vector cv = ct_transition(make5(0, 1, 0, 0, 0), cfg);
  CHECK((cv - make5(1, 1, 0, 0, 0)).cwiseAbs().maxCoeff() == 0.0);

  // zero velocity is a fixed point of the position/velocity blocks
  const Vector fixed = ct_transition(make5(0, 0, 0, 0, 0.7), cfg);
  CHECK((fixed - make5(0, 0, 0, 0, 0.7)).cwiseAbs().maxCoeff() == 0.0);

  // direct evaluation of the rotation entries at ω = π, T = 1
  const double pi = std::numbers::pi;
  const Vector out = ct_transition(make5(0, 1, 0, 0, pi), cfg);
  Vector expected(5);
  expected << std::sin(pi) / pi, std::cos(pi), (1 - std::cos(pi)) / pi,
      std::sin(pi), pi;
  CHECK((out - expected).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(expected[2] == doctest::Approx(2.0 / pi));
  CHECK(expected[1] == doctest::Approx(-1.0));
}

TEST_CASE("coordinated turn is continuous across the omega switch") {
  CoordinatedTurnConfig cfg{1.0, 1.0, 1.0};
  for (const Vector& x : {make5(0, 1, 0, 0, 0), make5(1, 0, 2, 1, 0),
                          make5(0, 0.6, 0, -0.8, 0)}) {
    Vector plus = x, minus = x;
    plus[4] = 1e-9;
    minus[4] = -1e-9;
    Vector limit = x;
    limit[4] = 0.0;
    const Vector at_limit = ct_transition(limit, cfg);
    Vector lp = ct_transition(plus, cfg);
    Vector lm = ct_transition(minus, cfg);
    lp[4] = 0.0;
    lm[4] = 0.0;
    Vector l0 = at_limit;
    l0[4] = 0.0;
    CHECK((lp - l0).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((lm - l0).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("coordinated turn process noise") {
  Matrix q = ct_process_noise({1.0, 1.0, 1.0});
  Matrix block(2, 2);
  block << 1.0 / 3.0, 0.5, 0.5, 1.0;
  CHECK((q.block<2, 2>(0, 0) - block).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((q.block<2, 2>(2, 2) - block).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(q(4, 4) == 1.0);
  CHECK((q - q.transpose()).cwiseAbs().maxCoeff() == 0.0);

  // zero-noise boundary: degenerate but well-formed
  Matrix q0 = ct_process_noise({1.0, 0.0, 0.5});
  CHECK(q0.block<4, 4>(0, 0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(q0(4, 4) == 0.5);

  Matrix q2 = ct_process_noise({2.0, 3.0, 0.01});
  Matrix top(2, 2);
  top << 8.0, 6.0, 6.0, 6.0;
  CHECK((q2.block<2, 2>(0, 0) - top).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(q2(4, 4) == 0.01);

  // positive definite for positive intensities
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(1e-6, 10.0);
  for (int trial = 0; trial < 25; ++trial) {
    const Matrix qq = ct_process_noise({unif(rng), unif(rng), unif(rng)});
    CHECK(Eigen::LLT<Matrix>(qq).info() == Eigen::Success);
  }
}

TEST_CASE("tdoa measurement") {
  const TdoaConfig cfg = unit_square_mics();

  const Vector center = tdoa_measure(make5(0.5, 0, 0.5, 0, 0), cfg);
  CHECK(center.cwiseAbs().maxCoeff() <= 1e-15);

  CHECK_THROWS_AS(tdoa_measure(make5(0, 0, 0, 0, 0), cfg), std::runtime_error);

  // hand-computed ranges for a target at (0, 0.5)
  const Vector y = tdoa_measure(make5(0, 0, 0.5, 0, 0), cfg);
  const double r1 = 0.5;
  const double r24 = std::sqrt(1.25);
  CHECK(y[0] == doctest::Approx(r1 - r24).epsilon(1e-12));
  CHECK(y[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(y[2] == doctest::Approx(r1 - r24).epsilon(1e-12));
  CHECK(r1 - r24 == doctest::Approx(-0.618034).epsilon(1e-5));
}

TEST_CASE("tdoa is invariant to joint translation") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 30; ++trial) {
    TdoaConfig cfg = unit_square_mics();
    const Vector x = make5(gauss(rng) + 3, 1, gauss(rng) + 3, 0, 0);
    const Eigen::Vector2d shift(gauss(rng) * 10, gauss(rng) * 10);
    TdoaConfig shifted = cfg;
    for (auto& mic : shifted.mic_positions) {
      mic += shift;
    }
    Vector xs = x;
    xs[0] += shift[0];
    xs[2] += shift[1];
    CHECK((tdoa_measure(x, cfg) - tdoa_measure(xs, shifted)).cwiseAbs().maxCoeff() <=
          1e-12);
  }
}

TEST_CASE("tdoa noise structure") {
  TdoaConfig cfg = unit_square_mics();
  cfg.sigma_sq = {0.01, 0.02, 0.03, 0.04};
  const Matrix r = tdoa_noise(cfg);
  Matrix expected(3, 3);
  expected << 0.03, 0.01, 0.01,
              0.01, 0.04, 0.01,
              0.01, 0.01, 0.05;
  CHECK((r - expected).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("named 1d models") {
  const StateSpaceModel cubic = make_illustration_model();
  CHECK(cubic.transition(Vector::Zero(1))[0] == 0.0);
  CHECK(cubic.transition(Vector::Constant(1, 3.0))[0] == doctest::Approx(0.27));
  CHECK(cubic.transition.jacobian(Vector::Constant(1, 3.0))(0, 0) ==
        doctest::Approx(3 * 0.01 * 9));
  CHECK(cubic.Q(0, 0) == 0.1);
  CHECK(cubic.R(0, 0) == 0.1);

  const StateSpaceModel trig = make_trig_model();
  CHECK(trig.transition(Vector::Zero(1))[0] == 0.0);
  CHECK(trig.measurement(Vector::Zero(1))[0] == 0.0);
  const double quarter_pi = std::numbers::pi / 4.0;
  CHECK(trig.transition(Vector::Constant(1, quarter_pi))[0] ==
        doctest::Approx(0.5 * quarter_pi * quarter_pi).epsilon(1e-12));
  CHECK(trig.Q(0, 0) == 0.1);
  CHECK(trig.R(0, 0) == 1.0);
}

TEST_CASE("analytical jacobians match central differences") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  struct Case {
    DifferentiableMap map;
    std::function<Vector(std::mt19937_64&)> sample;
  };
  std::vector<Case> cases;

  cases.push_back({make_ct_map({0.5, 1.0, 1.0}), [&](std::mt19937_64& r) {
                     std::uniform_real_distribution<double> u(-1, 1);
                     return make5(u(r) * 100, u(r) * 20, u(r) * 100, u(r) * 20,
                                  u(r) * 1.0);
                   }});
  cases.push_back({make_tdoa_map(unit_square_mics()), [&](std::mt19937_64& r) {
                     std::uniform_real_distribution<double> u(-1, 1);
                     return make5(3 + u(r), u(r), 3 + u(r), u(r), u(r));
                   }});
  const StateSpaceModel cubic = make_illustration_model();
  const StateSpaceModel trig = make_trig_model();
  for (const DifferentiableMap& m :
       {cubic.transition, trig.transition, trig.measurement}) {
    cases.push_back({m, [&](std::mt19937_64& r) {
                       std::uniform_real_distribution<double> u(-5, 5);
                       return Vector::Constant(1, u(r)).eval();
                     }});
  }

  for (const Case& c : cases) {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Vector x = c.sample(rng);
      const Matrix analytic = c.map.jacobian(x);
      const Matrix fd = finite_difference_jacobian(c.map.eval, x, c.map.out_dim);
      worst = std::max(worst, (analytic - fd).cwiseAbs().maxCoeff());
    }
    CHECK(worst <= 1e-5);
  }
}

TEST_CASE("state space model validation") {
  StateSpaceModel bad = make_illustration_model();
  bad.R = Matrix::Zero(1, 1);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  StateSpaceModel good = make_illustration_model();
  CHECK_NOTHROW(good.validate());
}
