#ifndef FUCIK_IO_CACHE_HPP
#define FUCIK_IO_CACHE_HPP

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "fucik/assembly.hpp"
#include "fucik/errors.hpp"

namespace fucik::io {

/*
 * On-disk layout, all fields little-endian:
 *
 *   char[8]  magic "FUCIKGP1"
 *   u64      n_dofs
 *   f64      s
 *   f64      lambda
 *   u64      domain hash
 *   f64[n*n] A, row-major
 *   f64[n*n] M, row-major
 *   f64[n]   M_L
 *   u64      FNV-1a checksum of every preceding byte
 */
inline constexpr std::array<char, 8> cache_magic{'F', 'U', 'C', 'I', 'K', 'G', 'P', '1'};

inline std::uint64_t cache_key(const Mesh& mesh, const Kernel& kernel)
{
  const std::uint64_t parts[3] = {mesh.domain().hash(), kernel.hash(), static_cast<std::uint64_t>(mesh.elements().size())};
  std::uint64_t h = fucik::detail::fnv1a(parts, sizeof parts);
  for (double x : mesh.coordinates())
    h = fucik::detail::fnv1a(&x, sizeof x, h);
  return h;
}

inline std::filesystem::path cache_path(const std::filesystem::path& out_dir, const Mesh& mesh, const Kernel& kernel)
{
  char name[32];
  std::snprintf(name, sizeof name, "%016llx.bin", static_cast<unsigned long long>(cache_key(mesh, kernel)));
  return out_dir / "cache" / name;
}

namespace detail {

template <class T>
void put(std::vector<unsigned char>& buf, T v)
{
  static_assert(sizeof(T) == 8);
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int k = 0; k < 8; ++k)
    buf.push_back(static_cast<unsigned char>(bits >> (8 * k)));
}

template <class T>
T get(const unsigned char*& p)
{
  std::uint64_t bits = 0;
  for (int k = 0; k < 8; ++k)
    bits |= static_cast<std::uint64_t>(p[k]) << (8 * k);
  p += 8;
  T v;
  std::memcpy(&v, &bits, 8);
  return v;
}

} // namespace detail

inline std::vector<unsigned char> serialize(const GalerkinPair& gp)
{
  const auto n = gp.size();
  std::vector<unsigned char> buf(cache_magic.begin(), cache_magic.end());
  buf.reserve(48 + 8 * static_cast<std::size_t>(2 * n * n + n + 1));
  detail::put<std::uint64_t>(buf, static_cast<std::uint64_t>(n));
  detail::put<double>(buf, gp.kernel.order());
  detail::put<double>(buf, gp.kernel.scale());
  detail::put<std::uint64_t>(buf, gp.mesh.domain().hash());
  for (const Matrix* m : {&gp.stiffness, &gp.mass})
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        detail::put<double>(buf, (*m)(i, j));
  for (Eigen::Index i = 0; i < n; ++i)
    detail::put<double>(buf, gp.lumped[i]);
  detail::put<std::uint64_t>(buf, fucik::detail::fnv1a(buf.data(), buf.size()));
  return buf;
}

/// Rebuilds a pair for `mesh`/`kernel` from bytes; empty when the bytes do not match or are damaged.
inline std::optional<GalerkinPair> deserialize(const std::vector<unsigned char>& buf, const Mesh& mesh,
                                               const Kernel& kernel)
{
  const auto n = static_cast<Eigen::Index>(mesh.dofs());
  const std::size_t expected = 8 + 4 * 8 + 8 * static_cast<std::size_t>(2 * n * n + n) + 8;
  if (buf.size() != expected || !std::equal(cache_magic.begin(), cache_magic.end(), buf.begin()))
    return std::nullopt;
  const unsigned char* p = buf.data() + expected - 8;
  if (detail::get<std::uint64_t>(p) != fucik::detail::fnv1a(buf.data(), expected - 8))
    return std::nullopt;

  p = buf.data() + 8;
  if (detail::get<std::uint64_t>(p) != static_cast<std::uint64_t>(n) || detail::get<double>(p) != kernel.order() ||
      detail::get<double>(p) != kernel.scale() || detail::get<std::uint64_t>(p) != mesh.domain().hash())
    return std::nullopt;

  Matrix A(n, n), M(n, n);
  Vector ML(n);
  for (Matrix* m : {&A, &M})
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        (*m)(i, j) = detail::get<double>(p);
  for (Eigen::Index i = 0; i < n; ++i)
    ML[i] = detail::get<double>(p);
  return GalerkinPair{std::move(A), std::move(M), std::move(ML), mesh, kernel};
}

/*
 * Assembles through the cache under `out_dir`. A file that cannot be read
 * back is reported through the warning sink and replaced.
 */
inline GalerkinPair assemble_cached(const Mesh& mesh, const Kernel& kernel, const std::filesystem::path& out_dir,
                                    bool enabled, bool* hit = nullptr)
{
  if (hit)
    *hit = false;
  if (!enabled)
    return assemble(mesh, kernel);

  const auto path = cache_path(out_dir, mesh, kernel);
  if (std::filesystem::exists(path))
  {
    std::ifstream in(path, std::ios::binary);
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (auto gp = deserialize(buf, mesh, kernel))
    {
      if (hit)
        *hit = true;
      return std::move(*gp);
    }
    fucik::detail::warn("cache file " + path.string() + " is corrupted or stale; ignoring it and reassembling");
  }

  auto gp = assemble(mesh, kernel);
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  const auto bytes = serialize(gp);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out)
    fucik::detail::warn("could not write cache file " + path.string());
  return gp;
}

} // namespace fucik::io

#endif
