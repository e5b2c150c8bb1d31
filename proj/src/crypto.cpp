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

#include "mwsmf/crypto.hpp"

#include <openssl/err.h>
#include <openssl/evp.h>
#include <openssl/rsa.h>
#include <openssl/sha.h>
#include <openssl/x509.h>

#include "mwsmf/errors.hpp"

namespace mwsmf {

namespace {

[[noreturn]] void crypto_fail(const std::string& what) {
  unsigned long code = ERR_get_error();
  char buf[256] = {0};
  if (code) ERR_error_string_n(code, buf, sizeof buf);
  ERR_clear_error();
  throw Error(Err::CryptoFailure, what + (code ? std::string(" (") + buf + ")" : ""));
}

const EVP_MD* md_for(std::string_view digest) {
  if (digest == "sha1") return EVP_sha1();
  if (digest == "sha256") return EVP_sha256();
  throw Error(Err::CryptoFailure, "unknown digest " + std::string(digest));
}

Bytes evp_digest(const EVP_MD* md, const uint8_t* data, size_t len) {
  Bytes out(EVP_MAX_MD_SIZE);
  unsigned int out_len = 0;
  if (EVP_Digest(data, len, out.data(), &out_len, md, nullptr) != 1)
    crypto_fail("EVP_Digest");
  out.resize(out_len);
  return out;
}

Bytes cbc_run(bool enc, bool pad, const Bytes& key, const Bytes& iv,
              const Bytes& input) {
  if (key.size() != 32)
    throw Error(Err::CryptoFailure, "AES-256 key must be 32 bytes");
  if (iv.size() != 16)
    throw Error(Err::CryptoFailure, "AES-CBC IV must be 16 bytes");
  if (!pad && input.size() % 16 != 0)
    throw Error(Err::CryptoFailure, "raw CBC input not block aligned");

  std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)> ctx(
      EVP_CIPHER_CTX_new(), EVP_CIPHER_CTX_free);
  if (!ctx) crypto_fail("EVP_CIPHER_CTX_new");
  if (EVP_CipherInit_ex(ctx.get(), EVP_aes_256_cbc(), nullptr, key.data(),
                        iv.data(), enc ? 1 : 0) != 1)
    crypto_fail("EVP_CipherInit_ex");
  EVP_CIPHER_CTX_set_padding(ctx.get(), pad ? 1 : 0);

  Bytes out(input.size() + 16);
  int n1 = 0, n2 = 0;
  if (EVP_CipherUpdate(ctx.get(), out.data(), &n1, input.data(),
                       static_cast<int>(input.size())) != 1)
    crypto_fail("EVP_CipherUpdate");
  if (EVP_CipherFinal_ex(ctx.get(), out.data() + n1, &n2) != 1) {
    ERR_clear_error();
    if (!enc)
      throw Error(Err::PaddingInvalid, "CBC padding check failed");
    crypto_fail("EVP_CipherFinal_ex");
  }
  out.resize(static_cast<size_t>(n1 + n2));
  return out;
}

}  // namespace

Bytes sha1(const uint8_t* data, size_t len) {
  return evp_digest(EVP_sha1(), data, len);
}

Bytes sha1(std::string_view data) {
  return sha1(reinterpret_cast<const uint8_t*>(data.data()), data.size());
}

Bytes sha256(const uint8_t* data, size_t len) {
  return evp_digest(EVP_sha256(), data, len);
}

Bytes sha256(std::string_view data) {
  return sha256(reinterpret_cast<const uint8_t*>(data.data()), data.size());
}

Bytes aes256_cbc_encrypt(const Bytes& key, const Bytes& iv,
                         const Bytes& plaintext) {
  return cbc_run(true, true, key, iv, plaintext);
}

Bytes aes256_cbc_decrypt(const Bytes& key, const Bytes& iv,
                         const Bytes& ciphertext) {
  if (ciphertext.empty() || ciphertext.size() % 16 != 0)
    throw Error(Err::PaddingInvalid, "ciphertext length not a block multiple");
  return cbc_run(false, true, key, iv, ciphertext);
}

Bytes aes256_cbc_encrypt_raw(const Bytes& key, const Bytes& iv,
                             const Bytes& plaintext) {
  return cbc_run(true, false, key, iv, plaintext);
}

Bytes aes256_cbc_decrypt_raw(const Bytes& key, const Bytes& iv,
                             const Bytes& ciphertext) {
  return cbc_run(false, false, key, iv, ciphertext);
}

RsaKeyPair RsaKeyPair::generate(int bits) {
  if (bits != 1024 && bits != 2048)
    throw Error(Err::CryptoFailure, "unsupported RSA modulus size");
  std::unique_ptr<EVP_PKEY_CTX, decltype(&EVP_PKEY_CTX_free)> ctx(
      EVP_PKEY_CTX_new_id(EVP_PKEY_RSA, nullptr), EVP_PKEY_CTX_free);
  if (!ctx || EVP_PKEY_keygen_init(ctx.get()) != 1 ||
      EVP_PKEY_CTX_set_rsa_keygen_bits(ctx.get(), bits) != 1)
    crypto_fail("RSA keygen init");
  EVP_PKEY* raw = nullptr;
  if (EVP_PKEY_keygen(ctx.get(), &raw) != 1) crypto_fail("RSA keygen");
  RsaKeyPair out;
  out.key_ = std::shared_ptr<EVP_PKEY>(raw, EVP_PKEY_free);
  out.has_private_ = true;
  return out;
}

RsaKeyPair RsaKeyPair::from_private_der(const Bytes& der) {
  const unsigned char* p = der.data();
  EVP_PKEY* raw = d2i_AutoPrivateKey(nullptr, &p, static_cast<long>(der.size()));
  if (!raw) {
    ERR_clear_error();
    throw Error(Err::KeystoreError, "cannot parse private key DER");
  }
  RsaKeyPair out;
  out.key_ = std::shared_ptr<EVP_PKEY>(raw, EVP_PKEY_free);
  out.has_private_ = true;
  return out;
}

RsaKeyPair RsaKeyPair::from_public_der(const Bytes& der) {
  const unsigned char* p = der.data();
  EVP_PKEY* raw = d2i_PUBKEY(nullptr, &p, static_cast<long>(der.size()));
  if (!raw) {
    ERR_clear_error();
    throw Error(Err::KeystoreError, "cannot parse public key DER");
  }
  RsaKeyPair out;
  out.key_ = std::shared_ptr<EVP_PKEY>(raw, EVP_PKEY_free);
  out.has_private_ = false;
  return out;
}

int RsaKeyPair::modulus_bits() const {
  if (!key_) return 0;
  return EVP_PKEY_bits(key_.get());
}

Bytes RsaKeyPair::private_der() const {
  if (!key_ || !has_private_)
    throw Error(Err::KeystoreError, "no private key");
  int len = i2d_PrivateKey(key_.get(), nullptr);
  if (len <= 0) crypto_fail("i2d_PrivateKey");
  Bytes out(static_cast<size_t>(len));
  unsigned char* p = out.data();
  i2d_PrivateKey(key_.get(), &p);
  return out;
}

Bytes RsaKeyPair::public_der() const {
  if (!key_) throw Error(Err::KeystoreError, "empty key handle");
  int len = i2d_PUBKEY(key_.get(), nullptr);
  if (len <= 0) crypto_fail("i2d_PUBKEY");
  Bytes out(static_cast<size_t>(len));
  unsigned char* p = out.data();
  i2d_PUBKEY(key_.get(), &p);
  return out;
}

RsaKeyPair RsaKeyPair::public_only() const {
  return from_public_der(public_der());
}

Bytes RsaKeyPair::sign(std::string_view digest, const uint8_t* data,
                       size_t len) const {
  if (!key_ || !has_private_)
    throw Error(Err::CryptoFailure, "signing requires a private key");
  const EVP_MD* md = md_for(digest);
  // PKCS#1 v1.5 needs room for the DigestInfo plus 11 bytes of padding
  size_t digest_info = (digest == "sha1") ? 35 : 51;
  if (static_cast<size_t>(EVP_PKEY_size(key_.get())) < digest_info + 11)
    throw Error(Err::KeyTooSmallForAlg, "modulus too small for digest");

  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(
      EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx ||
      EVP_DigestSignInit(ctx.get(), nullptr, md, nullptr, key_.get()) != 1)
    crypto_fail("EVP_DigestSignInit");
  size_t sig_len = 0;
  if (EVP_DigestSign(ctx.get(), nullptr, &sig_len, data, len) != 1)
    crypto_fail("EVP_DigestSign (size)");
  Bytes sig(sig_len);
  if (EVP_DigestSign(ctx.get(), sig.data(), &sig_len, data, len) != 1)
    crypto_fail("EVP_DigestSign");
  sig.resize(sig_len);
  return sig;
}

bool RsaKeyPair::verify(std::string_view digest, const uint8_t* data,
                        size_t len, const Bytes& signature) const {
  if (!key_) throw Error(Err::CryptoFailure, "empty key handle");
  const EVP_MD* md = md_for(digest);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(
      EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx ||
      EVP_DigestVerifyInit(ctx.get(), nullptr, md, nullptr, key_.get()) != 1)
    crypto_fail("EVP_DigestVerifyInit");
  int rc = EVP_DigestVerify(ctx.get(), signature.data(), signature.size(),
                            data, len);
  ERR_clear_error();
  return rc == 1;
}

Bytes RsaKeyPair::wrap(const Bytes& key, bool oaep) const {
  if (!key_) throw Error(Err::CryptoFailure, "empty key handle");
  std::unique_ptr<EVP_PKEY_CTX, decltype(&EVP_PKEY_CTX_free)> ctx(
      EVP_PKEY_CTX_new(key_.get(), nullptr), EVP_PKEY_CTX_free);
  if (!ctx || EVP_PKEY_encrypt_init(ctx.get()) != 1 ||
      EVP_PKEY_CTX_set_rsa_padding(
          ctx.get(), oaep ? RSA_PKCS1_OAEP_PADDING : RSA_PKCS1_PADDING) != 1)
    crypto_fail("RSA encrypt init");
  size_t out_len = 0;
  if (EVP_PKEY_encrypt(ctx.get(), nullptr, &out_len, key.data(), key.size()) !=
      1)
    crypto_fail("RSA encrypt (size)");
  Bytes out(out_len);
  if (EVP_PKEY_encrypt(ctx.get(), out.data(), &out_len, key.data(),
                       key.size()) != 1)
    crypto_fail("RSA encrypt");
  out.resize(out_len);
  return out;
}

Bytes RsaKeyPair::unwrap(const Bytes& wrapped, bool oaep) const {
  if (!key_ || !has_private_)
    throw Error(Err::KeyUnwrapFailed, "unwrap requires a private key");
  std::unique_ptr<EVP_PKEY_CTX, decltype(&EVP_PKEY_CTX_free)> ctx(
      EVP_PKEY_CTX_new(key_.get(), nullptr), EVP_PKEY_CTX_free);
  if (!ctx || EVP_PKEY_decrypt_init(ctx.get()) != 1 ||
      EVP_PKEY_CTX_set_rsa_padding(
          ctx.get(), oaep ? RSA_PKCS1_OAEP_PADDING : RSA_PKCS1_PADDING) != 1)
    crypto_fail("RSA decrypt init");
  size_t out_len = 0;
  if (EVP_PKEY_decrypt(ctx.get(), nullptr, &out_len, wrapped.data(),
                       wrapped.size()) != 1) {
    ERR_clear_error();
    throw Error(Err::KeyUnwrapFailed, "RSA decrypt failed");
  }
  Bytes out(out_len);
  if (EVP_PKEY_decrypt(ctx.get(), out.data(), &out_len, wrapped.data(),
                       wrapped.size()) != 1) {
    ERR_clear_error();
    throw Error(Err::KeyUnwrapFailed, "RSA decrypt failed");
  }
  out.resize(out_len);
  return out;
}

bool RsaKeyPair::same_public_key(const RsaKeyPair& other) const {
  if (!key_ || !other.key_) return false;
  return public_der() == other.public_der();
}

}  // namespace mwsmf
