#include <doctest.h>

#include <random>

#include "modspec/frf.hpp"
#include "oracles.hpp"

using namespace modspec;

namespace {

FrequencyGrid single(double omega) { return FrequencyGrid(std::vector<double>{omega}); }

FrfMatrix constant_frf(const FrequencyGrid& g, const Eigen::MatrixXcd& value) {
  return FrfMatrix(g, std::vector<Eigen::MatrixXcd>(g.size(), value));
}

InterconnectionStructure two_dof_k() {
  const std::pair<Index, Index> pair{0, 1};
  Eigen::MatrixXd k_ba(2, 1), k_ab(1, 2);
  k_ba << 1, 0;
  k_ab << 1, 0;
  return InterconnectionStructure(stiff_coupling(90.0, std::span(&pair, 1), 2), k_ba, k_ab,
                                  {{1, 1}, {1, 1}});
}

}  // namespace

TEST_SUITE("frf_core") {

TEST_CASE("frequency grid validation and logspace") {
  CHECK_THROWS_AS(FrequencyGrid(std::vector<double>{1.0, 1.0}), InvalidParameter);
  CHECK_THROWS_AS(FrequencyGrid(std::vector<double>{-1.0}), InvalidParameter);
  const auto g = FrequencyGrid::logspace_hz(0.5, 5.0, 1000);
  REQUIRE(g.size() == 1000);
  CHECK(g.hz(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(g.hz(999) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(g[1] / g[0] == doctest::Approx(std::pow(10.0, 1.0 / 999.0)).epsilon(1e-12));
  CHECK(FrequencyGrid::logspace_hz(1.0, 2.0, 0).empty());
}

TEST_CASE("scalar module FRF at zero frequency and resonance") {
  const auto m1 = SecondOrderModel::scalar(1.0, 0.3, 100.0);
  const auto g = eval_second_order_frf(m1, FrequencyGrid(std::vector<double>{0.0, 10.0}));
  CHECK(std::abs(g[0](0, 0) - 0.01) < 1e-15);
  CHECK(std::abs(g[1](0, 0)) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(std::abs(g[1](0, 0).real()) < 1e-12);
  const auto m2 = SecondOrderModel::scalar(2.0, 0.3, 100.0);
  CHECK(std::abs(eval_second_order_frf(m2, single(0.0))[0](0, 0) - 0.01) < 1e-15);
}

TEST_CASE("second-order model validation") {
  Eigen::MatrixXd m(2, 2), k(2, 2), d = Eigen::MatrixXd::Zero(2, 2), b = Eigen::MatrixXd::Identity(2, 2);
  m << 1, 0.5, 0.4, 1;
  k.setIdentity();
  CHECK_THROWS_AS(SecondOrderModel(m, d, k, b, b), InvalidParameter);
  m << 1, 0, 0, -1;
  CHECK_THROWS_AS(SecondOrderModel(m, d, k, b, b), InvalidParameter);
  m.setIdentity();
  CHECK_THROWS_AS(SecondOrderModel(m, d, k, Eigen::MatrixXd::Identity(3, 2), b), DimensionMismatch);
  CHECK_THROWS_AS(eval_second_order_frf(SecondOrderModel(m, d, k, b, b), FrequencyGrid{}), InvalidParameter);
  // Undamped at resonance: singular dynamic stiffness.
  CHECK_THROWS_AS(eval_second_order_frf(SecondOrderModel::scalar(1.0, 0.0, 4.0), single(2.0)),
                  SingularDynamicStiffness);
}

TEST_CASE("reciprocity of symmetric models") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd a = oracle::random_real(3, 3, rng);
    const Eigen::MatrixXd mass = a * a.transpose() + Eigen::MatrixXd::Identity(3, 3);
    const Eigen::MatrixXd b = oracle::random_real(3, 3, rng);
    const Eigen::MatrixXd stiff = 100.0 * (b * b.transpose());
    const Eigen::MatrixXd damp = 0.01 * stiff + 0.1 * mass;
    const Eigen::MatrixXd c = oracle::random_real(2, 3, rng);
    const auto g = eval_second_order_frf(SecondOrderModel(mass, damp, stiff, c.transpose(), c),
                                         FrequencyGrid::logspace_hz(0.1, 10.0, 50));
    for (const auto& s : g.samples()) CHECK((s - s.transpose()).norm() <= 1e-10 * s.norm());
  }
}

TEST_CASE("block_diag") {
  const auto g = single(1.0);
  const Eigen::MatrixXcd a = Eigen::MatrixXcd::Constant(1, 1, Complex(2, 1));
  const Eigen::MatrixXcd b = Eigen::MatrixXcd::Constant(1, 1, Complex(-3, 0.5));
  const std::vector<FrfMatrix> two = {constant_frf(g, a), constant_frf(g, b)};
  const auto bd = block_diag(two);
  Eigen::MatrixXcd expect = Eigen::MatrixXcd::Zero(2, 2);
  expect(0, 0) = a(0, 0);
  expect(1, 1) = b(0, 0);
  CHECK(bd[0] == expect);
  const auto same = block_diag(std::span(two.data(), 1));
  CHECK(same[0] == a);
  const std::vector<FrfMatrix> mods = {
      eval_second_order_frf(SecondOrderModel::scalar(1, 0.3, 100), single(0.0)),
      eval_second_order_frf(SecondOrderModel::scalar(2, 0.3, 100), single(0.0))};
  CHECK((block_diag(mods)[0] - Eigen::MatrixXcd(Eigen::Vector2cd(0.01, 0.01).asDiagonal())).norm() < 1e-16);
  const std::vector<FrfMatrix> bad = {constant_frf(g, a), constant_frf(single(2.0), b)};
  CHECK_THROWS_AS(block_diag(bad), GridMismatch);
}

TEST_CASE("stiff coupling") {
  const std::pair<Index, Index> one{0, 1};
  Eigen::MatrixXd expect(2, 2);
  expect << -90, 90, 90, -90;
  CHECK(stiff_coupling(90.0, std::span(&one, 1), 2) == expect);
  CHECK(stiff_coupling(0.0, std::span(&one, 1), 2).isZero(0.0));
  const std::vector<std::pair<Index, Index>> disjoint = {{0, 1}, {2, 3}};
  const Eigen::MatrixXd k = stiff_coupling(5.0, disjoint, 4);
  CHECK(k.topRightCorner(2, 2).isZero(0.0));
  CHECK(k.bottomLeftCorner(2, 2).isZero(0.0));
  CHECK(k.topLeftCorner(2, 2) == k.bottomRightCorner(2, 2));
  const std::pair<Index, Index> out_of_range{0, 4};
  CHECK_THROWS_AS(stiff_coupling(1.0, std::span(&out_of_range, 1), 4), IndexOutOfRange);
  CHECK_THROWS_AS(stiff_coupling(-1.0, std::span(&one, 1), 2), InvalidParameter);
}

TEST_CASE("interconnection dimension checks") {
  CHECK_THROWS_AS(InterconnectionStructure(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(3, 1),
                                           Eigen::MatrixXd::Zero(1, 2), {{1, 1}, {1, 1}}),
                  DimensionMismatch);
  CHECK_THROWS_AS(InterconnectionStructure(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 1),
                                           Eigen::MatrixXd::Zero(1, 2), {{1, 1}}),
                  DimensionMismatch);
  const auto k = two_dof_k();
  CHECK(k.full().rows() == 3);
  CHECK(k.full()(2, 2) == 0.0);
}

TEST_CASE("open-loop selection when K_BB is zero") {
  std::mt19937_64 rng(3);
  const auto g = FrequencyGrid::logspace_hz(1, 2, 3);
  std::vector<Eigen::MatrixXcd> s;
  for (int i = 0; i < 3; ++i) s.push_back(oracle::random_complex(3, 2, rng));
  const FrfMatrix g_b(g, s);
  const Eigen::MatrixXd k_ba = oracle::random_real(2, 2, rng), k_ab = oracle::random_real(1, 3, rng);
  const InterconnectionStructure k(Eigen::MatrixXd::Zero(2, 3), k_ba, k_ab, {{3, 2}});
  const auto g_a = assemble_system_frf(g_b, k);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK((g_a[i] - k_ab.cast<Complex>() * s[i] * k_ba.cast<Complex>()).norm() < 1e-14);
}

TEST_CASE("two-DOF DC gain and resonances against the assembled global model") {
  const oracle::TwoDofGlobal ref(1, 2, 0.3, 0.3, 100, 100, 90);
  const auto k = two_dof_k();
  const FrequencyGrid g(std::vector<double>{0.0, 3.0, 7.0, 12.0});
  const std::vector<FrfMatrix> mods = {eval_second_order_frf(SecondOrderModel::scalar(1, 0.3, 100), g),
                                       eval_second_order_frf(SecondOrderModel::scalar(2, 0.3, 100), g)};
  const auto g_a = assemble_system_frf(block_diag(mods), k);
  CHECK(std::abs(g_a[0](0, 0) - 19.0 / 2800.0) <= 1e-12 * 19.0 / 2800.0);
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(std::abs(g_a[i](0, 0) - ref.g11(g[i])) <= 1e-10 * std::abs(ref.g11(g[i])));
  const auto wn = ref.natural_frequencies();
  CHECK(wn(0) == doctest::Approx(7.94).epsilon(1e-3));
  CHECK(wn(1) == doctest::Approx(14.90).epsilon(1e-3));
}

TEST_CASE("closure consistency against a direct dense solve") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dim(1, 3);
  for (int trial = 0; trial < 50; ++trial) {
    const Index p = dim(rng), m = dim(rng), p_a = dim(rng), m_a = dim(rng);
    const auto g = FrequencyGrid::logspace_hz(0.1, 1.0, 4);
    std::vector<Eigen::MatrixXcd> s;
    for (std::size_t i = 0; i < g.size(); ++i) s.push_back(oracle::random_complex(p, m, rng, 0.3));
    const FrfMatrix g_b(g, s);
    const Eigen::MatrixXd k_bb = oracle::random_real(m, p, rng, 0.5);
    const Eigen::MatrixXd k_ba = oracle::random_real(m, m_a, rng);
    const Eigen::MatrixXd k_ab = oracle::random_real(p_a, p, rng);
    const InterconnectionStructure k(k_bb, k_ba, k_ab, {{p, m}});
    const auto g_a = assemble_system_frf(g_b, k);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Eigen::MatrixXcd ref = oracle::direct_closure(s[i], k_bb, k_ba, k_ab);
      CHECK((g_a[i] - ref).norm() <= 1e-10 * std::max(ref.norm(), 1e-300));
    }
  }
}

TEST_CASE("ill-posed interconnection") {
  // G_B = 1, K_BB = 1: I - K_BB G_B = 0.
  const auto g = single(1.0);
  const FrfMatrix g_b = constant_frf(g, Eigen::MatrixXcd::Ones(1, 1));
  const InterconnectionStructure k(Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1),
                                   Eigen::MatrixXd::Ones(1, 1), {{1, 1}});
  CHECK_THROWS_AS(assemble_system_frf(g_b, k), IllPosedInterconnection);
  CHECK_THROWS_AS(nominal_system(g_b, k), IllPosedInterconnection);
}

TEST_CASE("zero perturbation gives a bit-identical system FRF") {
  const auto g = FrequencyGrid::logspace_hz(0.5, 5, 30);
  const std::vector<FrfMatrix> mods = {eval_second_order_frf(SecondOrderModel::scalar(1, 0.3, 100), g),
                                       eval_second_order_frf(SecondOrderModel::scalar(2, 0.3, 100), g)};
  const auto a = assemble_system_frf(block_diag(mods), two_dof_k());
  const std::vector<FrfMatrix> copy = mods;
  const auto b = assemble_system_frf(block_diag(copy), two_dof_k());
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("nominal operator structure") {
  const auto g = FrequencyGrid::logspace_hz(0.5, 5, 20);
  SUBCASE("decoupled identity routing") {
    std::mt19937_64 rng(5);
    std::vector<Eigen::MatrixXcd> s;
    for (std::size_t i = 0; i < g.size(); ++i) s.push_back(oracle::random_complex(2, 2, rng));
    const InterconnectionStructure k(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Identity(2, 2),
                                     Eigen::MatrixXd::Identity(2, 2), {{2, 2}});
    const auto n = nominal_system(FrfMatrix(g, s), k);
    Eigen::MatrixXcd expect = Eigen::MatrixXcd::Zero(4, 4);
    expect.topRightCorner(2, 2).setIdentity();
    expect.bottomLeftCorner(2, 2).setIdentity();
    for (const auto& x : n.samples()) CHECK(x == expect);
  }
  SUBCASE("two-DOF: 3x3 with exact zero corner") {
    const std::vector<FrfMatrix> mods = {eval_second_order_frf(SecondOrderModel::scalar(1, 0.3, 100), g),
                                         eval_second_order_frf(SecondOrderModel::scalar(2, 0.3, 100), g)};
    const auto n = nominal_system(block_diag(mods), two_dof_k());
    CHECK(n.rows() == 3);
    CHECK(n.cols() == 3);
    for (const auto& x : n.samples()) CHECK(x(2, 2) == Complex(0.0, 0.0));
  }
}

TEST_CASE("nominal operator reproduces system changes through the LFT") {
  std::mt19937_64 rng(19);
  std::uniform_int_distribution<int> dim(1, 2);
  for (int trial = 0; trial < 40; ++trial) {
    const Index p1 = dim(rng), m1 = dim(rng), p2 = dim(rng), m2 = dim(rng), p_a = dim(rng), m_a = dim(rng);
    const auto g = FrequencyGrid(std::vector<double>{1.0});
    const FrfMatrix g1 = constant_frf(g, oracle::random_complex(p1, m1, rng, 0.3));
    const FrfMatrix g2 = constant_frf(g, oracle::random_complex(p2, m2, rng, 0.3));
    const Index p = p1 + p2, m = m1 + m2;
    const InterconnectionStructure k(oracle::random_real(m, p, rng, 0.5), oracle::random_real(m, m_a, rng),
                                     oracle::random_real(p_a, p, rng), {{p1, m1}, {p2, m2}});
    const std::vector<FrfMatrix> base = {g1, g2};
    const FrfMatrix g_b = block_diag(base);
    const Eigen::MatrixXcd n = nominal_system(g_b, k)[0];
    CHECK(n.bottomRightCorner(p_a, m_a).isZero(0.0));

    // Push-through: G_A = N21 G_B K_BA = K_AB G_B N12.
    const Eigen::MatrixXcd gb = g_b[0];
    const Eigen::MatrixXcd g_a = assemble_system_frf(g_b, k)[0];
    const double tol = 1e-10 * std::max(1.0, g_a.norm());
    CHECK((n.bottomLeftCorner(p_a, p) * gb * k.k_ba() - g_a).norm() <= tol);
    CHECK((k.k_ab() * gb * n.topRightCorner(m, m_a) - g_a).norm() <= tol);

    Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(p, m);
    e.topLeftCorner(p1, m1) = oracle::random_complex(p1, m1, rng, 0.05);
    e.bottomRightCorner(p2, m2) = oracle::random_complex(p2, m2, rng, 0.05);
    const std::vector<FrfMatrix> hat = {constant_frf(g, gb.topLeftCorner(p1, m1) + e.topLeftCorner(p1, m1)),
                                        constant_frf(g, gb.bottomRightCorner(p2, m2) + e.bottomRightCorner(p2, m2))};
    const Eigen::MatrixXcd e_a = assemble_system_frf(block_diag(hat), k)[0] - assemble_system_frf(g_b, k)[0];
    const Eigen::MatrixXcd n11 = n.topLeftCorner(m, p);
    const Eigen::MatrixXcd lft = n.bottomLeftCorner(p_a, p) * e *
                                 (Eigen::MatrixXcd::Identity(m, m) - n11 * e).inverse() *
                                 n.topRightCorner(m, m_a);
    CHECK((lft - e_a).norm() <= 1e-9 * std::max(1e-12, e_a.norm()));
  }
}

TEST_CASE("error frf requires aligned grids and shapes") {
  const auto a = constant_frf(single(1.0), Eigen::MatrixXcd::Ones(1, 1));
  const auto b = constant_frf(single(2.0), Eigen::MatrixXcd::Ones(1, 1));
  const auto c = constant_frf(single(1.0), Eigen::MatrixXcd::Ones(2, 1));
  CHECK_THROWS_AS(error_frf(a, b), GridMismatch);
  CHECK_THROWS_AS(error_frf(a, c), ShapeMismatch);
  CHECK(error_frf(a, a)[0].isZero(0.0));
}

}  // TEST_SUITE
