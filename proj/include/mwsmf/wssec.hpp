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

#ifndef MWSMF_WSSEC_HPP
#define MWSMF_WSSEC_HPP

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "mwsmf/crypto.hpp"
#include "mwsmf/rng.hpp"
#include "mwsmf/soap.hpp"

namespace mwsmf {

// Fixed algorithm identifiers carried on the wire.
inline constexpr std::string_view kAlgRsaSha1 = "rsa-sha1";
inline constexpr std::string_view kAlgRsaSha256 = "rsa-sha256";
inline constexpr std::string_view kAlgRsaPkcs1 = "rsa-pkcs1-15";
inline constexpr std::string_view kAlgRsaOaep = "rsa-oaep";
inline constexpr std::string_view kAlgAes256Cbc = "aes256-cbc";

inline constexpr int64_t kDefaultTimestampLifetimeMs = 300000;
inline constexpr int64_t kDefaultTimestampSkewMs = 300000;

enum class ProfileName { Mobile, Full };

/// Algorithm envelope a party is allowed to use. MOBILE is the profile
/// feasible on constrained handsets (AES-256-CBC body cipher, RSA-1024
/// PKCS#1 v1.5 key transport, RSA-SHA1 signatures); FULL is a strict
/// superset adding RSA-SHA256, OAEP and 2048-bit keys.
struct SecurityProfile {
  ProfileName name = ProfileName::Mobile;

  static const SecurityProfile& mobile();
  static const SecurityProfile& full();
  static const SecurityProfile& by_name(std::string_view label);  // "MOBILE"/"FULL"

  const char* label() const;
  bool allows_signature(std::string_view alg) const;
  bool allows_transport(std::string_view alg) const;
  bool allows_rsa_bits(int bits) const;
  std::string_view default_signature() const;
  std::string_view default_transport() const;

  bool operator==(const SecurityProfile&) const = default;
};

/// Keys a party holds, together with the profile they are declared under.
struct KeyMaterial {
  std::string identity;
  RsaKeyPair rsa;
  SecurityProfile profile = SecurityProfile::mobile();
  std::optional<std::array<uint8_t, 32>> aes_key;

  /// Throws when the modulus size is outside the declared profile.
  void validate() const;
};

struct WsTimestamp {
  int64_t created_ms = 0;
  int64_t expires_ms = 0;
};

struct WsSignature {
  std::string alg;
  Bytes body_digest;  // digest of the canonical plaintext body
  Bytes value;
};

struct WsEncryptedKey {
  std::string transport_alg;
  Bytes wrapped_key;
};

/// Typed view of the Security header block.
struct SecurityHeader {
  std::optional<WsTimestamp> timestamp;
  std::optional<WsSignature> signature;
  std::optional<WsEncryptedKey> encrypted_key;
  std::string token_ref;   // identity of the signing/encrypting party
  std::string credential;  // shared-secret token for endpoint auth, hex

  bool empty() const;
  XmlElement to_element() const;
  static SecurityHeader from_element(const XmlElement& elem);

  static SecurityHeader read(const SoapEnvelope& env);  // empty when absent
  void write(SoapEnvelope& env) const;
};

// Encrypted body payload: <xenc:CipherData alg="aes256-cbc"> with IV and
// CipherValue children, both base64.
bool is_cipher_data(const XmlElement& body);
XmlElement make_cipher_data(const Bytes& iv, const Bytes& ciphertext);

SoapEnvelope sign_envelope(const SoapEnvelope& env, const KeyMaterial& signer,
                           std::string_view alg);
bool verify_signature(const SoapEnvelope& env,
                      const RsaKeyPair& verifier_public);

SoapEnvelope encrypt_body(const SoapEnvelope& env, const KeyMaterial& recipient,
                          std::string_view transport, Rng& rng);
SoapEnvelope decrypt_body(const SoapEnvelope& env,
                          const KeyMaterial& recipient);

SoapEnvelope insert_timestamp(const SoapEnvelope& env, int64_t created_ms,
                              int64_t lifetime_ms);
bool validate_timestamp(const SoapEnvelope& env, int64_t now_ms,
                        int64_t skew_ms);

/// timestamp -> sign (over the plaintext body) -> encrypt. The profile
/// argument picks the algorithms; both parties' declared profiles must
/// admit them.
SoapEnvelope secure_outbound(const SoapEnvelope& env, const KeyMaterial& sender,
                             const KeyMaterial& recipient,
                             const SecurityProfile& profile, int64_t now_ms,
                             int64_t lifetime_ms, Rng& rng);

struct OpenResult {
  SoapEnvelope env;
  bool verified = false;
  bool fresh = false;
};

/// Inverse of secure_outbound: decrypt, then verify signature and
/// timestamp. Bad signatures and stale timestamps are reported in the
/// result, not raised.
OpenResult open_inbound(const SoapEnvelope& env, const KeyMaterial& recipient,
                        const RsaKeyPair& sender_public, int64_t now_ms,
                        int64_t skew_ms);

/// True when every algorithm identifier in the message is in the MOBILE
/// set; used to police overlay-side traffic.
bool uses_only_mobile_algorithms(const SoapEnvelope& env);

/// Directory of DER-encoded RSA keys: `<identity>.der` (private),
/// `<identity>.pub.der` (public), optional `<identity>.aes` (raw 32 bytes).
class Keystore {
 public:
  Keystore() = default;
  explicit Keystore(std::string dir) : dir_(std::move(dir)) {}

  /// Private pair when available, else public only. Throws
  /// Error(KeystoreError) when neither file exists.
  RsaKeyPair key(const std::string& identity) const;
  RsaKeyPair public_key(const std::string& identity) const;
  KeyMaterial material(const std::string& identity,
                       const SecurityProfile& profile) const;
  bool has(const std::string& identity) const;

  /// Generates a fresh pair and writes both DER files.
  static void generate(const std::string& dir, const std::string& identity,
                       int bits);

  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
};

}  // namespace mwsmf

#endif  // MWSMF_WSSEC_HPP
