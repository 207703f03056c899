#pragma once

#include <chrono>
#include <string>

#include "gffpin/errors.hpp"

namespace gffpin {

// Wall-clock budget checked between units of work; a zero budget never expires.
class Deadline {
 public:
  using clock = std::chrono::steady_clock;
  Deadline() = default;
  explicit Deadline(double minutes) : unlimited_(minutes <= 0.0) {
    end_ = clock::now() + std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(minutes * 60.0));
  }
  bool expired() const { return !unlimited_ && clock::now() >= end_; }
  void check(const std::string& where) const {
    if (expired()) throw BudgetExhausted("budget exhausted during " + where);
  }

 private:
  bool unlimited_ = true;
  clock::time_point end_{};
};

}  // namespace gffpin
