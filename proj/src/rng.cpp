#include "gffpin/rng.hpp"

#include <cmath>
#include <numbers>

namespace gffpin {

namespace {
constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;
}  // namespace

std::array<std::uint32_t, 4> Philox::block(std::array<std::uint32_t, 4> c,
                                           std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t(kM0) * c[0];
    const std::uint64_t p1 = std::uint64_t(kM1) * c[2];
    const auto hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
    const auto hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kW0;
    k[1] += kW1;
  }
  return c;
}

Philox::Philox(std::uint64_t key, std::uint64_t stream) : key_(key), stream_(stream) {}

void Philox::refill() {
  const std::array<std::uint32_t, 4> ctr{std::uint32_t(counter_), std::uint32_t(counter_ >> 32),
                                         std::uint32_t(stream_), std::uint32_t(stream_ >> 32)};
  buf_ = block(ctr, {std::uint32_t(key_), std::uint32_t(key_ >> 32)});
  ++counter_;
  pos_ = 0;
}

Philox::result_type Philox::operator()() {
  if (pos_ == 4) refill();
  return buf_[pos_++];
}

std::uint64_t Philox::next_u64() {
  const std::uint64_t hi = (*this)();
  const std::uint64_t lo = (*this)();
  return (hi << 32) | lo;
}

double Philox::uniform() {
  return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Philox::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(t);
  have_spare_ = true;
  return r * std::cos(t);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : tag) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

StreamKey StreamKey::with_replica(std::uint64_t r) const {
  StreamKey k = *this;
  k.replica = r;
  return k;
}

StreamKey StreamKey::with_purpose(std::string_view tag) const {
  StreamKey k = *this;
  k.purpose = hash_tag(tag);
  return k;
}

StreamKey StreamKey::with_experiment(std::uint64_t e) const {
  StreamKey k = *this;
  k.experiment = e;
  return k;
}

std::uint64_t StreamKey::id() const {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ experiment);
  h = splitmix64(h ^ replica);
  return splitmix64(h ^ purpose);
}

Philox StreamKey::engine() const {
  const std::uint64_t s = id();
  return Philox(splitmix64(s ^ 0x5bd1e995ull), s);
}

}  // namespace gffpin
