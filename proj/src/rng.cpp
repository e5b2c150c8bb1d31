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

#include "mwsmf/rng.hpp"

#include <openssl/rand.h>

#include "mwsmf/errors.hpp"

namespace mwsmf {

Rng Rng::entropy() { return Rng(); }

uint64_t Rng::next_u64() {
  std::lock_guard<std::mutex> lock(mu_);
  if (seeded_) return gen_();
  uint64_t v = 0;
  if (RAND_bytes(reinterpret_cast<unsigned char*>(&v), sizeof v) != 1)
    throw Error(Err::CryptoFailure, "RAND_bytes failed");
  return v;
}

uint64_t Rng::next_below(uint64_t bound) {
  if (bound == 0) throw Error(Err::Internal, "next_below(0)");
  // rejection sampling keeps the distribution uniform
  uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % bound;
}

void Rng::fill(uint8_t* out, size_t len) {
  size_t i = 0;
  while (i < len) {
    uint64_t v = next_u64();
    for (int j = 0; j < 8 && i < len; ++j, ++i) {
      out[i] = static_cast<uint8_t>(v >> (8 * j));
    }
  }
}

Bytes Rng::bytes(size_t len) {
  Bytes out(len);
  fill(out.data(), len);
  return out;
}

std::string Rng::token(size_t hex_chars) {
  Bytes raw((hex_chars + 1) / 2);
  fill(raw.data(), raw.size());
  std::string hex = hex_encode(raw);
  hex.resize(hex_chars);
  return hex;
}

}  // namespace mwsmf
