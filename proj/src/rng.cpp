#include "sparsecert/rng.hpp"

#include <cmath>
#include <numbers>

namespace sparsecert {
namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

inline Philox4x64::Block round(const Philox4x64::Block& c, const Philox4x64::Key& k) {
  std::uint64_t hi0, lo0, hi1, lo1;
  mulhilo(kMul0, c[0], hi0, lo0);
  mulhilo(kMul1, c[2], hi1, lo1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

Philox4x64::Block Philox4x64::encrypt(Block counter, Key key) {
  counter = round(counter, key);
  for (int r = 1; r < 10; ++r) {
    key[0] += kWeyl0;
    key[1] += kWeyl1;
    counter = round(counter, key);
  }
  return counter;
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : key_{seed, stream} {}

std::uint64_t Rng::next_u64() {
  if (buffer_pos_ == 4) {
    for (auto& word : counter_) {
      if (++word != 0) break;
    }
    buffer_ = Philox4x64::encrypt(counter_, key_);
    buffer_pos_ = 0;
  }
  return buffer_[buffer_pos_++];
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  // 1 - uniform() lies in (0, 1], so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_normal_ = true;
  return radius * std::cos(angle);
}

double Rng::sign() {
  return (next_u64() & 1ULL) ? 1.0 : -1.0;
}

std::uint64_t Rng::uniform_int(std::uint64_t bound) {
  if (bound == 0) return 0;
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const unsigned __int128 p = static_cast<unsigned __int128>(next_u64()) * bound;
    if (static_cast<std::uint64_t>(p) >= threshold) {
      return static_cast<std::uint64_t>(p >> 64);
    }
  }
}

std::uint64_t mix_stream(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b + 0x632BE59BD9B4E019ULL));
}

}  // namespace sparsecert
