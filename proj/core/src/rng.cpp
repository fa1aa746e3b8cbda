#include "kpnp/rng.hpp"

#include <cmath>
#include <numbers>

namespace kpnp {
namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
  for (auto& word : s_) word = splitmix64(seed);
}

std::uint64_t Rng::next() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t bound) {
  __extension__ using u128 = unsigned __int128;
  const u128 wide = static_cast<u128>(next()) * bound;
  return static_cast<std::uint64_t>(wide >> 64);
}

Vec gaussian_noise(Rng& rng, std::size_t n, double sigma) {
  if (!(sigma >= 0.0)) throw ParameterError("gaussian_noise: sigma must be >= 0");
  Vec out(n, 0.0);
  if (sigma == 0.0) return out;
  for (std::size_t i = 0; i < n; i += 2) {
    const double u1 = 1.0 - rng.uniform();  // (0, 1]
    const double u2 = rng.uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out[i] = sigma * r * std::cos(angle);
    if (i + 1 < n) out[i + 1] = sigma * r * std::sin(angle);
  }
  return out;
}

Vec uniform_vector(Rng& rng, std::size_t n) {
  Vec out(n);
  for (auto& v : out) v = rng.uniform();
  return out;
}

}  // namespace kpnp
