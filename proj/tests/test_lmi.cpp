#include <doctest.h>

#include <random>

#include "modspec/lmi.hpp"
#include "oracles.hpp"

using namespace modspec;

TEST_SUITE("lmi") {

TEST_CASE("embedding of the identity and a 2x2 example") {
  CHECK(hermitian_embed(Eigen::MatrixXcd::Identity(3, 3)) == Eigen::MatrixXd::Identity(6, 6));
  Eigen::Matrix2cd h;
  h << 2.0, Complex(0, 1), Complex(0, -1), 2.0;
  const Eigen::MatrixXd e = hermitian_embed(h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e);
  const Eigen::Vector4d expect(1, 1, 3, 3);
  CHECK((es.eigenvalues() - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("embedding rejects non-Hermitian input") {
  Eigen::Matrix2cd h;
  h << 1.0, Complex(0, 1), Complex(0, 1), 1.0;
  CHECK_THROWS_AS(hermitian_embed(h), NotHermitian);
  CHECK_THROWS_AS(hermitian_embed(Eigen::MatrixXcd::Zero(2, 3)), NotHermitian);
}

TEST_CASE("positive definiteness is preserved by the embedding") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> dim(1, 6);
  int pd = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = dim(rng);
    Eigen::MatrixXcd h = oracle::random_hermitian(n, rng);
    // Shift so that roughly half the cases are positive definite.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    const double shift = -es.eigenvalues().minCoeff() + (trial % 2 == 0 ? 0.1 : -0.1);
    h += shift * Eigen::MatrixXcd::Identity(n, n);
    const bool complex_pd = Eigen::LLT<Eigen::MatrixXcd>(h).info() == Eigen::Success;
    const bool real_pd = Eigen::LLT<Eigen::MatrixXd>(hermitian_embed(h)).info() == Eigen::Success;
    CHECK(complex_pd == real_pd);
    pd += complex_pd;
  }
  CHECK(pd == 50);
}

TEST_CASE("solver: scalar Schur bound") {
  // min x  s.t. [[x, 1], [1, 1]] >= 0  ->  x = 1.
  LinearSdp p;
  p.cost = Eigen::VectorXd::Ones(1);
  LmiConstraint c;
  c.constant = (Eigen::Matrix2d() << 0, 1, 1, 1).finished();
  c.coefficients.push_back((Eigen::Matrix2d() << 1, 0, 0, 0).finished());
  p.lmis.push_back(c);
  p.lower = Eigen::VectorXd::Constant(1, -std::numeric_limits<double>::infinity());
  p.upper = Eigen::VectorXd::Constant(1, std::numeric_limits<double>::infinity());
  const auto r = solve_sdp(p, Eigen::VectorXd::Constant(1, 5.0));
  CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.gap <= 1e-9);
}

TEST_CASE("solver: largest eigenvalue") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd a0 = oracle::random_real(5, 5, rng);
    const Eigen::MatrixXd a = 0.5 * (a0 + a0.transpose());
    LinearSdp p;
    p.cost = Eigen::VectorXd::Ones(1);
    p.lmis.push_back({-a, {Eigen::MatrixXd::Identity(5, 5)}});
    p.lower = Eigen::VectorXd::Constant(1, -std::numeric_limits<double>::infinity());
    p.upper = Eigen::VectorXd::Constant(1, std::numeric_limits<double>::infinity());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    const double lmax = es.eigenvalues().maxCoeff();
    const auto r = solve_sdp(p, Eigen::VectorXd::Constant(1, lmax + 10.0));
    CHECK(std::abs(r.x(0) - lmax) < 1e-8 * std::max(1.0, std::abs(lmax)));
  }
}

TEST_CASE("solver: box bounds are respected") {
  // min -x1 - x2, x in [0, 2] x [0, 3], no binding LMI.
  LinearSdp p;
  p.cost = Eigen::Vector2d(-1, -1);
  p.lmis.push_back({Eigen::MatrixXd::Identity(2, 2), {Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 2)}});
  p.lower = Eigen::Vector2d(0, 0);
  p.upper = Eigen::Vector2d(2, 3);
  const auto r = solve_sdp(p, Eigen::Vector2d(1, 1));
  CHECK(r.x(0) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(r.x(1) == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("solver rejects an infeasible start") {
  LinearSdp p;
  p.cost = Eigen::VectorXd::Ones(1);
  p.lmis.push_back({Eigen::MatrixXd::Zero(1, 1), {Eigen::MatrixXd::Identity(1, 1)}});
  p.lower = Eigen::VectorXd::Constant(1, -std::numeric_limits<double>::infinity());
  p.upper = Eigen::VectorXd::Constant(1, std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(solve_sdp(p, Eigen::VectorXd::Constant(1, -1.0)), SolverFailure);
  CHECK(p.strictly_feasible(Eigen::VectorXd::Constant(1, 0.5)));
  CHECK_FALSE(p.strictly_feasible(Eigen::VectorXd::Constant(1, 0.0)));
}

}  // TEST_SUITE
