#include <doctest.h>

#include "modspec/models.hpp"
#include "oracles.hpp"

using namespace modspec;

TEST_SUITE("model_library") {

TEST_CASE("two-DOF defaults") {
  const auto model = build_two_dof({}, FrequencyGrid(std::vector<double>{0.0, 5.0, 20.0}));
  const auto g = model.system_frf();
  CHECK(std::abs(g[0](0, 0) - 19.0 / 2800.0) <= 1e-12 * 19.0 / 2800.0);
  const oracle::TwoDofGlobal ref(1, 2, 0.3, 0.3, 100, 100, 90);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(std::abs(g[i](0, 0) - ref.g11(model.grid()[i])) <= 1e-12 * std::abs(ref.g11(model.grid()[i])));
  CHECK(model.modules().size() == 2);
  CHECK(model.coupling().k_bb() == (Eigen::MatrixXd(2, 2) << -90, 90, 90, -90).finished());
  CHECK_THROWS_AS(build_two_dof({.m1 = -1.0}, model.grid()), InvalidParameter);
}

TEST_CASE("decoupled and heavy-partner limits") {
  const auto grid = FrequencyGrid::logspace_hz(0.5, 5, 25);
  const auto decoupled = build_two_dof({.k = 0.0}, grid).system_frf();
  const auto alone = eval_second_order_frf(SecondOrderModel::scalar(1, 0.3, 100), grid);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(decoupled[i](0, 0) - alone[i](0, 0)) < 1e-15);

  const auto heavy = build_two_dof({.m2 = 1e9}, grid).system_frf();
  const auto grounded = eval_second_order_frf(SecondOrderModel::scalar(1, 0.3, 190), grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(std::abs(heavy[i](0, 0) - grounded[i](0, 0)) <= 1e-6 * std::abs(grounded[i](0, 0)));
}

TEST_CASE("builder determinism") {
  const auto grid = FrequencyGrid::logspace_hz(0.5, 5, 10);
  for (int rep = 0; rep < 2; ++rep) {
    const auto a = build_two_dof({}, grid), b = build_two_dof({}, grid);
    CHECK(*a.modules()[0].second_order() == *b.modules()[0].second_order());
    CHECK(a.coupling() == b.coupling());
    const auto ca = build_plate_pillar({}, grid), cb = build_plate_pillar({}, grid);
    for (std::size_t j = 0; j < ca.modules().size(); ++j)
      CHECK(*ca.modules()[j].second_order() == *cb.modules()[j].second_order());
  }
}

TEST_CASE("perturbations") {
  const auto base = SecondOrderModel::scalar(1, 0.3, 100);
  CHECK(apply_perturbation(base, Perturbation::stiffness_scale(0, 1.0)) == base);
  CHECK(apply_perturbation(base, Perturbation::added_mass(0, 0, 0.0)) == base);
  CHECK(apply_perturbation(base, Perturbation::added_mass(0, 0, 1.0)).mass()(0, 0) == 2.0);

  const auto soft = apply_perturbation(base, Perturbation::stiffness_scale(0, 0.99));
  const double wn = std::sqrt(soft.stiffness()(0, 0) / soft.mass()(0, 0));
  CHECK(wn == doctest::Approx(10.0 * std::sqrt(0.99)).epsilon(1e-14));

  const auto twice = apply_perturbation(apply_perturbation(base, Perturbation::stiffness_scale(0, 0.9)),
                                        Perturbation::stiffness_scale(0, 0.8));
  CHECK(twice.stiffness()(0, 0) == doctest::Approx(100 * 0.9 * 0.8).epsilon(1e-14));
  const auto masses = apply_perturbation(apply_perturbation(base, Perturbation::added_mass(0, 0, 0.25)),
                                         Perturbation::added_mass(0, 0, 0.5));
  CHECK(masses.mass()(0, 0) == 1.75);
  const auto damp = apply_perturbation(base, Perturbation::damping_scale(0, 2.0));
  CHECK(damp.damping()(0, 0) == doctest::Approx(0.6).epsilon(1e-15));

  CHECK_THROWS_AS(apply_perturbation(base, Perturbation::added_mass(0, 1, 1.0)), InvalidParameter);
  CHECK_THROWS_AS(apply_perturbation(base, Perturbation::added_mass(0, 0, -1.0)), InvalidParameter);
  CHECK_THROWS_AS(apply_perturbation(base, Perturbation::stiffness_scale(0, -0.5)), InvalidParameter);

  const auto model = build_two_dof({}, FrequencyGrid::logspace_hz(0.5, 5, 5));
  const auto heavier = apply_perturbation(model, Perturbation::added_mass(1, 0, 1.0));
  CHECK(heavier.modules()[1].second_order()->mass()(0, 0) == 3.0);
  CHECK(*heavier.modules()[0].second_order() == *model.modules()[0].second_order());
  CHECK_THROWS_AS(apply_perturbation(model, Perturbation::added_mass(2, 0, 1.0)), InvalidParameter);
}

TEST_CASE("chain and plate-pillar models are well posed") {
  const auto grid = FrequencyGrid::logspace_hz(0.1, 50, 60);
  ChainParams chain;
  chain.modules = {{1}, {3, 2.0}, {2}};
  const auto c = build_chain(chain, grid);
  CHECK(c.modules().size() == 3);
  CHECK_NOTHROW(c.system_frf());
  const auto n = c.nominal();
  CHECK(n.rows() == 1 + 2 + 2 + 1);

  const auto pp = build_plate_pillar({}, grid);
  CHECK(pp.modules().size() == 6);
  const auto g = pp.system_frf();
  CHECK(g.rows() == 1);
  for (const auto& s : g.samples()) CHECK(std::isfinite(std::abs(s(0, 0))));
}

TEST_CASE("families") {
  const auto grid = FrequencyGrid::logspace_hz(0.5, 5, 5);
  const auto f = two_dof_family(grid);
  CHECK(f.index("m2") == 1);
  CHECK_THROWS_AS(f.index("nope"), IndexOutOfRange);
  CHECK(f.param_module[f.index("k")] == std::nullopt);
  const auto built = f.build_nominal().system_frf();
  const auto direct = build_two_dof({}, grid).system_frf();
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(built[i] == direct[i]);

  const auto chain = make_family("chain", grid, {.chain_modules = 2, .chain_dofs = 1});
  CHECK(chain.param_names.size() == 7);
  CHECK(*chain.param_module[chain.index("k2")] == 1);
  CHECK_NOTHROW(chain.build_nominal().system_frf());
  CHECK_NOTHROW(make_family("plate_pillar", grid).build_nominal());
  CHECK_THROWS_AS(make_family("nope", grid), InvalidParameter);
  for (const auto& name : builder_names()) CHECK(default_builder_range(name).n > 0);
}

}  // TEST_SUITE
