#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace gffpin {

// Philox4x32-10 counter-based generator. The key and the upper half of
// the counter identify a stream; the lower half counts blocks.
class Philox {
 public:
  using result_type = std::uint32_t;

  Philox(std::uint64_t key, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return 0xffffffffu; }

  result_type operator()();
  std::uint64_t next_u64();

  // Uniform on (0, 1), 53 random bits, never 0 or 1.
  double uniform();
  double normal();

  std::uint64_t key() const { return key_; }
  std::uint64_t stream() const { return stream_; }

  // Raw block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key);

 private:
  void refill();

  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t hash_tag(std::string_view tag);

// Stream identity: (master seed, experiment id, replica id, purpose tag).
struct StreamKey {
  std::uint64_t master = 0;
  std::uint64_t experiment = 0;
  std::uint64_t replica = 0;
  std::uint64_t purpose = 0;

  StreamKey with_replica(std::uint64_t r) const;
  StreamKey with_purpose(std::string_view tag) const;
  StreamKey with_experiment(std::uint64_t e) const;
  Philox engine() const;
  // Stable 64-bit id recorded in provenance fields.
  std::uint64_t id() const;
};

}  // namespace gffpin
