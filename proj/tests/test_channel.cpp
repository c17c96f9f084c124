// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/SVD>

#include <numbers>
#include <sstream>

#include "dsbeam/channel.hpp"

using namespace dsbeam;
using std::numbers::pi;

namespace {

SystemConfig small_config() {
  SystemConfig cfg;
  cfg.n_tx = 16;
  cfg.n_rf = 4;
  cfg.n_rx = 2;
  cfg.n_users = 1;
  cfg.n_streams = 1;
  return cfg;
}

}  // namespace

TEST_CASE("array_response trivial cases") {
  const CVector a1 = array_response<double>(1, 1.234, 0.5);
  REQUIRE(a1.size() == 1);
  CHECK(std::abs(a1(0) - Complex(1.0, 0.0)) < 1e-15);

  const CVector a2 = array_response<double>(2, 0.0, 0.5);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(a2(0) - Complex(inv_sqrt2, 0.0)) < 1e-14);
  CHECK(std::abs(a2(1) - Complex(inv_sqrt2, 0.0)) < 1e-14);

  // sin(pi/2) = 1 and half-wavelength spacing give a per-element phase of pi.
  const CVector a4 = array_response<double>(4, pi / 2.0, 0.5);
  for (int n = 0; n < 4; ++n) {
    const double expected = n % 2 == 0 ? 0.5 : -0.5;
    CHECK(std::abs(a4(n) - Complex(expected, 0.0)) < 1e-13);
  }
}

TEST_CASE("array_response has unit norm for arbitrary angles") {
  RandomStream rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + rng.uniform_int(128);
    const double angle = rng.uniform(-10.0, 10.0);
    const CVector a = array_response<double>(n, angle, 0.5);
    CHECK(std::abs(a.norm() - 1.0) < 1e-14);
  }
}

TEST_CASE("generate_channel produces the configured dimensions") {
  SystemConfig cfg;  // library defaults: 64 tx, 4 rx, 6 users
  ClusterChannelParams params;
  RandomStream rng(42);
  const ChannelRealization ch = generate_channel(cfg, params, rng);
  REQUIRE(ch.per_user.size() == 6);
  for (const CMatrix& h : ch.per_user) {
    CHECK(h.rows() == 4);
    CHECK(h.cols() == 64);
  }
  for (const auto& rays : ch.rays) CHECK(rays.size() == 6 * 15);
}

TEST_CASE("zero path loss yields the zero matrix") {
  SystemConfig cfg = small_config();
  ClusterChannelParams params;
  params.path_loss_linear = 0.0;
  RandomStream rng(1);
  const ChannelRealization ch = generate_channel(cfg, params, rng);
  CHECK(ch.per_user[0].norm() == 0.0);
}

TEST_CASE("mean Frobenius energy matches n_tx*n_rx (Monte-Carlo oracle)") {
  SystemConfig cfg = small_config();
  ClusterChannelParams params;
  params.n_clusters = 3;
  params.n_rays = 4;
  RandomStream rng(2024);
  double acc = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const ChannelRealization ch = generate_channel(cfg, params, rng);
    acc += ch.per_user[0].squaredNorm();
  }
  const double expected = static_cast<double>(cfg.n_tx) * cfg.n_rx;  // rho = 1
  CHECK(acc / draws == doctest::Approx(expected).epsilon(0.03));
}

TEST_CASE("stored rays reconstruct the emitted matrix") {
  SystemConfig cfg;
  ClusterChannelParams params;
  params.path_loss_linear = 0.37;
  RandomStream rng(5);
  const ChannelRealization ch = generate_channel(cfg, params, rng);
  for (int k = 0; k < cfg.n_users; ++k) {
    const CMatrix rebuilt = reconstruct_channel(ch, k, cfg.antenna_spacing_wavelengths);
    CHECK((rebuilt - ch.per_user[k]).norm() <= 1e-12 * ch.per_user[k].norm());
  }
}

TEST_CASE("rank is bounded by min(n_rx, n_clusters*n_rays)") {
  SystemConfig cfg = small_config();
  cfg.n_rx = 4;
  ClusterChannelParams params;
  params.n_clusters = 1;
  params.n_rays = 2;  // rank can be at most 2 < n_rx
  RandomStream rng(9);
  for (int i = 0; i < 20; ++i) {
    const ChannelRealization ch = generate_channel(cfg, params, rng);
    Eigen::JacobiSVD<CMatrix> svd(ch.per_user[0]);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (Eigen::Index j = 0; j < sv.size(); ++j)
      if (sv(j) > 1e-10 * sv(0)) ++rank;
    CHECK(rank <= 2);
  }
}

TEST_CASE("laplacian offsets have the configured spread") {
  RandomStream rng(77);
  const double spread = 10.0 * pi / 180.0;
  const double scale = spread / std::numbers::sqrt2;
  double sum = 0.0, sum2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.laplacian(scale);
    sum += x;
    sum2 += x * x;
  }
  CHECK(std::abs(sum / n) < 2e-3);
  CHECK(std::sqrt(sum2 / n) == doctest::Approx(spread).epsilon(0.02));
}

TEST_CASE("invalid configuration is rejected") {
  SystemConfig cfg = small_config();
  cfg.n_rf = 32;  // exceeds n_tx
  ClusterChannelParams params;
  RandomStream rng(1);
  CHECK_THROWS_AS(generate_channel(cfg, params, rng), ConfigError);

  SystemConfig cfg2 = small_config();
  cfg2.n_streams = 3;  // exceeds n_rx
  CHECK_THROWS_AS(generate_channel(cfg2, params, rng), ConfigError);
}

TEST_CASE("equal seeds give byte-identical exports, different seeds differ") {
  SystemConfig cfg = small_config();
  cfg.n_users = 2;
  ClusterChannelParams params;
  params.n_clusters = 2;
  params.n_rays = 3;

  RandomStream rng_a(123), rng_b(123), rng_c(124);
  const ChannelRealization a = generate_channel(cfg, params, rng_a);
  const ChannelRealization b = generate_channel(cfg, params, rng_b);
  const ChannelRealization c = generate_channel(cfg, params, rng_c);

  std::ostringstream sa, sb, sc;
  save_channel(a, sa);
  save_channel(b, sb);
  save_channel(c, sc);
  CHECK(sa.str() == sb.str());
  CHECK(sa.str() != sc.str());
}

TEST_CASE("channel container round-trips") {
  SystemConfig cfg = small_config();
  cfg.n_users = 3;
  ClusterChannelParams params;
  params.n_clusters = 2;
  params.n_rays = 2;
  RandomStream rng(55);
  const ChannelRealization ch = generate_channel(cfg, params, rng);

  std::stringstream buf;
  save_channel(ch, buf);
  const ChannelRealization loaded = load_channel(buf);
  REQUIRE(loaded.per_user.size() == ch.per_user.size());
  CHECK(loaded.seed == ch.seed);
  for (std::size_t k = 0; k < ch.per_user.size(); ++k)
    CHECK((loaded.per_user[k] - ch.per_user[k]).norm() == 0.0);

  std::stringstream bad("not a container at all");
  CHECK_THROWS_AS(load_channel(bad), IoError);
}

TEST_CASE("log-distance path loss stays within the distance-range bounds") {
  PathLossModel model;
  model.kind = PathLossModel::Kind::LogDistance;
  model.exponent = 3.0;
  model.reference_loss_db = 61.39;
  model.cell_radius_m = 40.0;
  // Distances are clipped to [1e-3, cell_radius], so rho is bracketed by the
  // losses at the two extremes.
  const double rho_max = db_to_linear(-(model.reference_loss_db + 10.0 * model.exponent * std::log10(1e-3)));
  const double rho_min = db_to_linear(-(model.reference_loss_db + 10.0 * model.exponent * std::log10(40.0)));
  RandomStream rng(3);
  for (int i = 0; i < 200; ++i) {
    const double rho = model.sample(rng);
    CHECK(rho >= rho_min - 1e-30);
    CHECK(rho <= rho_max + 1e-12);
  }
  PathLossModel unit;
  CHECK(unit.sample(rng) == 1.0);
}
