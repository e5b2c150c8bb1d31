// Copyright 2026 The mwsmf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MWSMF_RNG_HPP
#define MWSMF_RNG_HPP

#include <cstdint>
#include <mutex>
#include <random>
#include <string>

#include "mwsmf/util.hpp"

namespace mwsmf {

/// Randomness source for IVs, ephemeral keys and correlation tokens.
/// Seeded mode is fully deterministic (mt19937_64 is specified by the
/// standard, so the stream is identical across platforms); entropy mode
/// draws from the OS. Safe under concurrent use.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seeded_(true), gen_(seed) {}

  // Movable so components can own their stream; the mutex guards calls,
  // not moves, which follow the usual exclusive-access rule.
  Rng(Rng&& other) noexcept
      : seeded_(other.seeded_), gen_(std::move(other.gen_)) {}
  Rng& operator=(Rng&& other) noexcept {
    seeded_ = other.seeded_;
    gen_ = std::move(other.gen_);
    return *this;
  }

  /// Entropy-backed generator (non-reproducible). Used when the caller
  /// opts into production entropy.
  static Rng entropy();

  uint64_t next_u64();
  uint64_t next_below(uint64_t bound);  // uniform in [0, bound)
  void fill(uint8_t* out, size_t len);
  Bytes bytes(size_t len);
  std::string token(size_t hex_chars = 16);

 private:
  Rng() : seeded_(false), gen_(0) {}

  bool seeded_;
  std::mt19937_64 gen_;
  std::mutex mu_;
};

}  // namespace mwsmf

#endif  // MWSMF_RNG_HPP
