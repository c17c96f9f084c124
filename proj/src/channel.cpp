// SPDX-License-Identifier: Apache-2.0
#include "dsbeam/channel.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace dsbeam {

static_assert(std::endian::native == std::endian::little,
              "channel container I/O assumes a little-endian host");

ChannelRealization generate_channel(const SystemConfig& cfg,
                                    const std::vector<ClusterChannelParams>& per_user_params,
                                    RandomStream& rng) {
  cfg.validate();
  if (static_cast<int>(per_user_params.size()) != cfg.n_users)
    throw ConfigError("need one ClusterChannelParams per user");

  ChannelRealization out;
  out.seed = rng.seed();
  out.per_user.reserve(cfg.n_users);
  out.rays.reserve(cfg.n_users);
  out.path_loss.reserve(cfg.n_users);

  for (int k = 0; k < cfg.n_users; ++k) {
    const ClusterChannelParams& p = per_user_params[k];
    p.validate();
    const double laplace_scale = p.angular_spread_rad / std::numbers::sqrt2;

    std::vector<Ray> rays;
    rays.reserve(static_cast<std::size_t>(p.n_clusters) * p.n_rays);
    for (int c = 0; c < p.n_clusters; ++c) {
      const double mean_aod = rng.uniform(p.mean_angle_min_rad, p.mean_angle_max_rad);
      const double mean_aoa = rng.uniform(p.mean_angle_min_rad, p.mean_angle_max_rad);
      for (int r = 0; r < p.n_rays; ++r) {
        Ray ray;
        ray.aod_rad = mean_aod + rng.laplacian(laplace_scale);
        ray.aoa_rad = mean_aoa + rng.laplacian(laplace_scale);
        ray.gain = rng.complex_normal();
        rays.push_back(ray);
      }
    }

    const double scale = std::sqrt(static_cast<double>(cfg.n_tx) * cfg.n_rx * p.path_loss_linear /
                                   (static_cast<double>(p.n_clusters) * p.n_rays));
    CMatrix h = CMatrix::Zero(cfg.n_rx, cfg.n_tx);
    for (const Ray& ray : rays) {
      const CVector ar = array_response(cfg.n_rx, ray.aoa_rad, cfg.antenna_spacing_wavelengths);
      const CVector at = array_response(cfg.n_tx, ray.aod_rad, cfg.antenna_spacing_wavelengths);
      h.noalias() += ray.gain * ar * at.adjoint();
    }
    h *= scale;

    out.per_user.push_back(std::move(h));
    out.rays.push_back(std::move(rays));
    out.path_loss.push_back(p.path_loss_linear);
  }
  return out;
}

ChannelRealization generate_channel(const SystemConfig& cfg, const ClusterChannelParams& params,
                                    RandomStream& rng) {
  return generate_channel(cfg, std::vector<ClusterChannelParams>(cfg.n_users, params), rng);
}

CMatrix reconstruct_channel(const ChannelRealization& realization, int user,
                            double spacing_wavelengths) {
  const CMatrix& ref = realization.per_user.at(user);
  const std::vector<Ray>& rays = realization.rays.at(user);
  const double rho = realization.path_loss.at(user);
  const auto n_rx = ref.rows();
  const auto n_tx = ref.cols();
  const double scale =
      std::sqrt(static_cast<double>(n_tx) * n_rx * rho / static_cast<double>(rays.size()));
  CMatrix h = CMatrix::Zero(n_rx, n_tx);
  for (const Ray& ray : rays) {
    const CVector ar = array_response<double>(n_rx, ray.aoa_rad, spacing_wavelengths);
    const CVector at = array_response<double>(n_tx, ray.aod_rad, spacing_wavelengths);
    h.noalias() += ray.gain * ar * at.adjoint();
  }
  return scale * h;
}

namespace {

constexpr char kMagic[8] = {'D', 'S', 'B', 'C', 'H', 'A', 'N', '1'};

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IoError("channel container truncated");
  return value;
}

}  // namespace

void save_channel(const ChannelRealization& realization, std::ostream& out) {
  out.write(kMagic, sizeof(kMagic));
  write_pod<std::uint64_t>(out, realization.seed);
  const std::uint32_t n_users = static_cast<std::uint32_t>(realization.per_user.size());
  if (n_users == 0) throw IoError("refusing to save an empty channel realization");
  const std::uint32_t n_rx = static_cast<std::uint32_t>(realization.per_user[0].rows());
  const std::uint32_t n_tx = static_cast<std::uint32_t>(realization.per_user[0].cols());
  write_pod(out, n_users);
  write_pod(out, n_rx);
  write_pod(out, n_tx);
  for (const CMatrix& h : realization.per_user) {
    if (h.rows() != n_rx || h.cols() != n_tx) throw IoError("ragged channel realization");
    for (Eigen::Index r = 0; r < h.rows(); ++r)
      for (Eigen::Index c = 0; c < h.cols(); ++c) {
        write_pod<double>(out, h(r, c).real());
        write_pod<double>(out, h(r, c).imag());
      }
  }
  if (!out) throw IoError("failed to write channel container");
}

void save_channel(const ChannelRealization& realization, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  save_channel(realization, f);
}

ChannelRealization load_channel(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError("not a channel container (bad magic)");
  ChannelRealization out;
  out.seed = read_pod<std::uint64_t>(in);
  const auto n_users = read_pod<std::uint32_t>(in);
  const auto n_rx = read_pod<std::uint32_t>(in);
  const auto n_tx = read_pod<std::uint32_t>(in);
  out.per_user.reserve(n_users);
  for (std::uint32_t k = 0; k < n_users; ++k) {
    CMatrix h(n_rx, n_tx);
    for (std::uint32_t r = 0; r < n_rx; ++r)
      for (std::uint32_t c = 0; c < n_tx; ++c) {
        const double re = read_pod<double>(in);
        const double im = read_pod<double>(in);
        h(r, c) = Complex(re, im);
      }
    out.per_user.push_back(std::move(h));
  }
  return out;
}

ChannelRealization load_channel(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for reading");
  return load_channel(f);
}

}  // namespace dsbeam
