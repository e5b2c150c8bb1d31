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

#ifndef MWSMF_CRYPTO_HPP
#define MWSMF_CRYPTO_HPP

#include <memory>
#include <string>
#include <string_view>

#include "mwsmf/util.hpp"

typedef struct evp_pkey_st EVP_PKEY;

namespace mwsmf {

Bytes sha1(const uint8_t* data, size_t len);
Bytes sha1(std::string_view data);
Bytes sha256(const uint8_t* data, size_t len);
Bytes sha256(std::string_view data);

// AES-256-CBC with PKCS#7 padding. decrypt throws Error(PaddingInvalid)
// when the final block does not unpad.
Bytes aes256_cbc_encrypt(const Bytes& key, const Bytes& iv,
                         const Bytes& plaintext);
Bytes aes256_cbc_decrypt(const Bytes& key, const Bytes& iv,
                         const Bytes& ciphertext);

// Raw block mode without padding; plaintext length must be a multiple of
// 16. This is the engine the published CBC test vectors exercise.
Bytes aes256_cbc_encrypt_raw(const Bytes& key, const Bytes& iv,
                             const Bytes& plaintext);
Bytes aes256_cbc_decrypt_raw(const Bytes& key, const Bytes& iv,
                             const Bytes& ciphertext);

/// RSA key pair (private+public, or public only). Copyable handle; the
/// underlying key is immutable after load.
class RsaKeyPair {
 public:
  RsaKeyPair() = default;

  static RsaKeyPair generate(int bits);
  static RsaKeyPair from_private_der(const Bytes& der);
  static RsaKeyPair from_public_der(const Bytes& der);

  bool valid() const { return key_ != nullptr; }
  bool has_private() const { return has_private_; }
  int modulus_bits() const;

  Bytes private_der() const;
  Bytes public_der() const;
  RsaKeyPair public_only() const;

  /// RSASSA-PKCS1-v1_5 over `data` with the given digest ("sha1"/"sha256").
  Bytes sign(std::string_view digest, const uint8_t* data, size_t len) const;
  bool verify(std::string_view digest, const uint8_t* data, size_t len,
              const Bytes& signature) const;

  /// Key transport: RSAES-PKCS1-v1_5 or OAEP. unwrap throws
  /// Error(KeyUnwrapFailed) on any decryption failure.
  Bytes wrap(const Bytes& key, bool oaep) const;
  Bytes unwrap(const Bytes& wrapped, bool oaep) const;

  bool same_public_key(const RsaKeyPair& other) const;

 private:
  std::shared_ptr<EVP_PKEY> key_;
  bool has_private_ = false;
};

}  // namespace mwsmf

#endif  // MWSMF_CRYPTO_HPP
