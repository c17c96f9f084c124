// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "dsbeam/fully_digital.hpp"
#include "dsbeam/nsp.hpp"

using namespace dsbeam;

namespace {

CMatrix random_cmatrix(int rows, int cols, RandomStream& rng) {
  CMatrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = rng.complex_normal();
  return m;
}

// Small end-to-end state for projection tests: channels, stage-1 combiners and
// a feasible hybrid solution.
struct PipelineFixture {
  SystemConfig cfg;
  ChannelRealization channel;
  FullyDigitalSolution fd;
  HybridSolution hybrid;
};

PipelineFixture make_fixture(std::uint64_t seed, int n_tx = 16, int n_rf = 8, int n_users = 3,
                             int n_streams = 2, int n_rx = 3) {
  PipelineFixture fx;
  fx.cfg.n_tx = n_tx;
  fx.cfg.n_rf = n_rf;
  fx.cfg.n_users = n_users;
  fx.cfg.n_streams = n_streams;
  fx.cfg.n_rx = n_rx;
  RandomStream rng(seed);
  fx.channel = generate_channel(fx.cfg, ClusterChannelParams{}, rng);
  fx.fd = svd_stage(fx.channel, fx.cfg);
  RandomStream init(seed ^ 0x5add5eedull);
  fx.hybrid = alternate_stage2(fx.fd.beamformers, fx.fd.user_powers, fx.cfg, 1e-4, 100, init);
  return fx;
}

}  // namespace

TEST_CASE("null_space_basis on [I | 0] finds the explicit kernel") {
  CMatrix m = CMatrix::Zero(2, 4);
  m(0, 0) = 1.0;
  m(1, 1) = 1.0;
  const CMatrix basis = null_space_basis(m);
  REQUIRE(basis.rows() == 4);
  REQUIRE(basis.cols() == 2);
  CHECK((m * basis).norm() < 1e-12);
  CHECK((basis.adjoint() * basis - CMatrix::Identity(2, 2)).norm() < 1e-12);
  // Kernel is span(e2, e3): the top 2x2 block must vanish.
  CHECK(basis.topRows(2).norm() < 1e-12);
}

TEST_CASE("null_space_basis edge cases") {
  RandomStream rng(3);
  const CMatrix full = random_cmatrix(4, 4, rng);
  CHECK(null_space_basis(full).cols() == 0);

  const CMatrix zero = CMatrix::Zero(3, 5);
  const CMatrix b = null_space_basis(zero);
  CHECK((b - CMatrix::Identity(5, 5)).norm() == 0.0);

  const CMatrix empty(0, 4);
  CHECK((null_space_basis(empty) - CMatrix::Identity(4, 4)).norm() == 0.0);
}

TEST_CASE("generic 10x16 stack has a 6-dimensional kernel") {
  RandomStream rng(5);
  const CMatrix m = random_cmatrix(10, 16, rng);
  const CMatrix basis = null_space_basis(m);
  CHECK(basis.cols() == 6);
  CHECK((m * basis).norm() <= 1e-10);
  CHECK((basis.adjoint() * basis - CMatrix::Identity(6, 6)).norm() < 1e-12);
}

TEST_CASE("build_equivalent_stack excludes exactly the user's own block") {
  PipelineFixture fx = make_fixture(11);
  const auto stack =
      build_equivalent_stack(fx.channel.per_user, fx.fd.combiners, fx.hybrid.analog.matrix);
  REQUIRE(stack.per_user_equivalent.size() == 3);
  REQUIRE(stack.stacked_excluding.size() == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(stack.per_user_equivalent[k].rows() == fx.cfg.n_streams);
    CHECK(stack.per_user_equivalent[k].cols() == fx.cfg.n_rf);
    REQUIRE(stack.stacked_excluding[k].rows() == 2 * fx.cfg.n_streams);
    int row = 0;
    for (int i = 0; i < 3; ++i) {
      if (i == k) continue;
      CHECK((stack.stacked_excluding[k].middleRows(row, fx.cfg.n_streams) -
             stack.per_user_equivalent[i])
                .norm() == 0.0);
      row += fx.cfg.n_streams;
    }
  }
}

TEST_CASE("single user: projection is the identity up to renormalization") {
  PipelineFixture fx = make_fixture(13, 8, 4, 1, 2, 2);
  const HybridSolution projected =
      project_digital(fx.hybrid, fx.channel.per_user, fx.fd.combiners, fx.fd.user_powers);
  // Same direction, norm restored to the power budget.
  const CMatrix before = fx.hybrid.digitals[0];
  const CMatrix after = projected.digitals[0];
  CHECK((after - before * (after.norm() / before.norm())).norm() < 1e-9 * after.norm());
  CHECK((projected.analog.matrix * after).squaredNorm() ==
        doctest::Approx(fx.fd.user_powers[0]).epsilon(1e-9));
}

TEST_CASE("projection nulls the inter-user coupling and keeps power budgets") {
  for (std::uint64_t seed : {21u, 22u, 23u, 24u, 25u}) {
    PipelineFixture fx = make_fixture(seed);
    const HybridSolution projected =
        project_digital(fx.hybrid, fx.channel.per_user, fx.fd.combiners, fx.fd.user_powers);
    CHECK((projected.analog.matrix - fx.hybrid.analog.matrix).norm() == 0.0);
    for (int k = 0; k < fx.cfg.n_users; ++k) {
      for (int i = 0; i < fx.cfg.n_users; ++i) {
        if (i == k) continue;
        const CMatrix coupler = fx.fd.combiners[i].adjoint() * fx.channel.per_user[i] *
                                projected.analog.matrix;
        const double leak = (coupler * projected.digitals[k]).norm();
        CHECK(leak <= 1e-9 * coupler.norm() * projected.digitals[k].norm());
      }
      CHECK((projected.analog.matrix * projected.digitals[k]).squaredNorm() ==
            doctest::Approx(fx.fd.user_powers[k]).epsilon(1e-9));
    }
  }
}

TEST_CASE("projector is idempotent, self-adjoint, and matches B B^H") {
  PipelineFixture fx = make_fixture(31);
  const auto stack =
      build_equivalent_stack(fx.channel.per_user, fx.fd.combiners, fx.hybrid.analog.matrix);
  for (int k = 0; k < fx.cfg.n_users; ++k) {
    const CMatrix basis = null_space_basis(stack.stacked_excluding[k]);
    REQUIRE(basis.cols() > 0);
    const CMatrix gram = basis.adjoint() * basis;
    const CMatrix q = basis * gram.ldlt().solve(basis.adjoint());
    CHECK((q * q - q).norm() <= 1e-10);
    CHECK((q - q.adjoint()).norm() <= 1e-10);
    CHECK((q - basis * basis.adjoint()).norm() <= 1e-10);
  }
}

TEST_CASE("empty null space raises InterferenceUncancellableError naming the user") {
  // Hand-built undersized front end: one RF chain shared by two single-stream
  // users. Each user's excluded stack is a nonzero 1x1 matrix, so there is no
  // null space left to project into.
  RandomStream rng(37);
  std::vector<CMatrix> channels{random_cmatrix(1, 2, rng), random_cmatrix(1, 2, rng)};
  std::vector<CMatrix> combiners{CMatrix::Identity(1, 1), CMatrix::Identity(1, 1)};

  HybridSolution hs;
  Eigen::VectorXi chains(2);
  chains << 0, 0;
  hs.analog = AnalogBeamformer::from_chain_map(chains, CVector::Ones(2), 1);
  hs.digitals = {CMatrix::Ones(1, 1), CMatrix::Ones(1, 1)};

  bool threw = false;
  try {
    project_digital(hs, channels, combiners, {1.0, 1.0});
  } catch (const InterferenceUncancellableError& e) {
    threw = true;
    CHECK(std::string(e.what()).find("user 0") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("zero-power users stay zero through the projection") {
  PipelineFixture fx = make_fixture(47);
  std::vector<double> powers = fx.fd.user_powers;
  powers[1] = 0.0;
  fx.hybrid.digitals[1].setZero();
  const HybridSolution projected =
      project_digital(fx.hybrid, fx.channel.per_user, fx.fd.combiners, powers);
  CHECK(projected.digitals[1].norm() == 0.0);
  CHECK((projected.analog.matrix * projected.digitals[0]).squaredNorm() ==
        doctest::Approx(powers[0]).epsilon(1e-9));
}

TEST_CASE("a beamformer orthogonal to the kernel raises DegenerateProjectionError") {
  PipelineFixture fx = make_fixture(43, 8, 4, 2, 1, 2);
  const auto stack =
      build_equivalent_stack(fx.channel.per_user, fx.fd.combiners, fx.hybrid.analog.matrix);
  // Place user 0's digital beamformer in the row space of the other users'
  // stack: the projection annihilates it exactly.
  HybridSolution doctored = fx.hybrid;
  doctored.digitals[0] = stack.stacked_excluding[0].adjoint();  // n_rf x 1
  CHECK_THROWS_AS(
      project_digital(doctored, fx.channel.per_user, fx.fd.combiners, fx.fd.user_powers),
      DegenerateProjectionError);
}
