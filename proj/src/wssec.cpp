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

#include "mwsmf/wssec.hpp"

#include <charconv>
#include <filesystem>

#include "mwsmf/errors.hpp"

namespace mwsmf {

namespace fs = std::filesystem;

const SecurityProfile& SecurityProfile::mobile() {
  static const SecurityProfile p{ProfileName::Mobile};
  return p;
}

const SecurityProfile& SecurityProfile::full() {
  static const SecurityProfile p{ProfileName::Full};
  return p;
}

const SecurityProfile& SecurityProfile::by_name(std::string_view label) {
  std::string l = lowercase(label);
  if (l == "mobile") return mobile();
  if (l == "full") return full();
  throw Error(Err::ProfileUnsupported,
              "unknown security profile: " + std::string(label));
}

const char* SecurityProfile::label() const {
  return name == ProfileName::Mobile ? "MOBILE" : "FULL";
}

bool SecurityProfile::allows_signature(std::string_view alg) const {
  if (alg == kAlgRsaSha1) return true;
  return name == ProfileName::Full && alg == kAlgRsaSha256;
}

bool SecurityProfile::allows_transport(std::string_view alg) const {
  if (alg == kAlgRsaPkcs1) return true;
  return name == ProfileName::Full && alg == kAlgRsaOaep;
}

bool SecurityProfile::allows_rsa_bits(int bits) const {
  if (bits == 1024) return true;
  return name == ProfileName::Full && bits == 2048;
}

std::string_view SecurityProfile::default_signature() const {
  return name == ProfileName::Mobile ? kAlgRsaSha1 : kAlgRsaSha256;
}

std::string_view SecurityProfile::default_transport() const {
  return name == ProfileName::Mobile ? kAlgRsaPkcs1 : kAlgRsaOaep;
}

void KeyMaterial::validate() const {
  if (!rsa.valid()) throw Error(Err::KeystoreError, "no key for " + identity);
  if (!profile.allows_rsa_bits(rsa.modulus_bits())) {
    throw Error(Err::AlgorithmNotInProfile,
                identity + ": " + std::to_string(rsa.modulus_bits()) +
                    "-bit RSA key not admitted by profile " + profile.label());
  }
}

namespace {

int64_t parse_ms(std::string_view text, const char* what) {
  int64_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size()) {
    throw Error(Err::MalformedXml, std::string("bad ") + what + " value");
  }
  return v;
}

XmlElement timestamp_element(const WsTimestamp& ts) {
  XmlElement e{{std::string(kWsseNs), "Timestamp"}};
  e.child(XmlElement({std::string(kWsseNs), "Created"},
                     std::to_string(ts.created_ms)));
  e.child(XmlElement({std::string(kWsseNs), "Expires"},
                     std::to_string(ts.expires_ms)));
  return e;
}

const QName kAlgAttr{"", "alg"};

// Signature input: the timestamp (when present) concatenated with the
// body, both canonical. Covering the timestamp keeps replay-window edits
// from going unnoticed.
std::string signing_input(const SecurityHeader& hdr, const XmlElement& body) {
  std::string input;
  if (hdr.timestamp) input = canonicalize(timestamp_element(*hdr.timestamp));
  input += canonicalize(body);
  return input;
}

// "" when the algorithm identifier is unknown.
std::string_view digest_name_for(std::string_view sig_alg) {
  if (sig_alg == kAlgRsaSha1) return "sha1";
  if (sig_alg == kAlgRsaSha256) return "sha256";
  return {};
}

Bytes digest_for(std::string_view sig_alg, const std::string& input) {
  if (sig_alg == kAlgRsaSha256) return sha256(input);
  return sha1(input);
}

}  // namespace

bool SecurityHeader::empty() const {
  return !timestamp && !signature && !encrypted_key && token_ref.empty() &&
         credential.empty();
}

XmlElement SecurityHeader::to_element() const {
  XmlElement sec{{std::string(kWsseNs), "Security"}};
  if (timestamp) sec.child(timestamp_element(*timestamp));
  if (!token_ref.empty()) {
    sec.child(XmlElement({std::string(kWsseNs), "TokenRef"}, token_ref));
  }
  if (!credential.empty()) {
    sec.child(XmlElement({std::string(kWsseNs), "Credential"}, credential));
  }
  if (signature) {
    XmlElement sig{{std::string(kDsNs), "Signature"}};
    sig.attr(kAlgAttr, signature->alg);
    sig.child(XmlElement({std::string(kDsNs), "DigestValue"},
                         base64_encode(signature->body_digest)));
    sig.child(XmlElement({std::string(kDsNs), "SignatureValue"},
                         base64_encode(signature->value)));
    sec.child(std::move(sig));
  }
  if (encrypted_key) {
    XmlElement ek{{std::string(kXencNs), "EncryptedKey"}};
    ek.attr(kAlgAttr, encrypted_key->transport_alg);
    ek.child(XmlElement({std::string(kXencNs), "CipherValue"},
                        base64_encode(encrypted_key->wrapped_key)));
    sec.child(std::move(ek));
  }
  return sec;
}

SecurityHeader SecurityHeader::from_element(const XmlElement& elem) {
  SecurityHeader hdr;
  for (const auto& node : elem.children) {
    if (!node.is_element()) {
      throw Error(Err::MalformedXml, "text content in Security header");
    }
    const XmlElement& c = node.element();
    const std::string& local = c.name.local;
    if (local == "Timestamp") {
      const XmlElement* created = c.find("Created");
      const XmlElement* expires = c.find("Expires");
      if (!created || !expires) {
        throw Error(Err::MalformedXml, "incomplete Timestamp");
      }
      hdr.timestamp = WsTimestamp{
          parse_ms(created->text_content(), "Created"),
          parse_ms(expires->text_content(), "Expires"),
      };
    } else if (local == "TokenRef") {
      hdr.token_ref = c.text_content();
    } else if (local == "Credential") {
      hdr.credential = c.text_content();
    } else if (local == "Signature") {
      const std::string* alg = c.attr_value(kAlgAttr);
      const XmlElement* digest = c.find("DigestValue");
      const XmlElement* value = c.find("SignatureValue");
      if (!alg || !digest || !value) {
        throw Error(Err::MalformedXml, "incomplete Signature");
      }
      hdr.signature = WsSignature{
          *alg,
          base64_decode(digest->text_content()),
          base64_decode(value->text_content()),
      };
    } else if (local == "EncryptedKey") {
      const std::string* alg = c.attr_value(kAlgAttr);
      const XmlElement* value = c.find("CipherValue");
      if (!alg || !value) {
        throw Error(Err::MalformedXml, "incomplete EncryptedKey");
      }
      hdr.encrypted_key = WsEncryptedKey{
          *alg,
          base64_decode(value->text_content()),
      };
    } else {
      throw Error(Err::MalformedXml,
                  "unexpected element in Security header: " + local);
    }
  }
  return hdr;
}

SecurityHeader SecurityHeader::read(const SoapEnvelope& env) {
  const XmlElement* sec = env.header("Security");
  if (!sec) return {};
  return from_element(*sec);
}

void SecurityHeader::write(SoapEnvelope& env) const {
  if (empty()) {
    env.remove_header("Security");
  } else {
    env.put_header(to_element());
  }
}

bool is_cipher_data(const XmlElement& body) {
  return body.name.ns == kXencNs && body.name.local == "CipherData";
}

XmlElement make_cipher_data(const Bytes& iv, const Bytes& ciphertext) {
  XmlElement e{{std::string(kXencNs), "CipherData"}};
  e.attr(kAlgAttr, std::string(kAlgAes256Cbc));
  e.child(XmlElement({std::string(kXencNs), "IV"}, base64_encode(iv)));
  e.child(XmlElement({std::string(kXencNs), "CipherValue"},
                     base64_encode(ciphertext)));
  return e;
}

SoapEnvelope sign_envelope(const SoapEnvelope& env, const KeyMaterial& signer,
                           std::string_view alg) {
  signer.validate();
  if (!signer.rsa.has_private()) {
    throw Error(Err::CryptoFailure, signer.identity + " has no private key");
  }
  if (!signer.profile.allows_signature(alg)) {
    throw Error(Err::AlgorithmNotInProfile,
                std::string(alg) + " not in profile " + signer.profile.label());
  }
  SoapEnvelope out = env;
  SecurityHeader hdr = SecurityHeader::read(out);
  hdr.token_ref = signer.identity;
  std::string input = signing_input(hdr, out.body);
  Bytes digest = digest_for(alg, input);
  Bytes value = signer.rsa.sign(
      digest_name_for(alg), reinterpret_cast<const uint8_t*>(input.data()),
      input.size());
  hdr.signature = WsSignature{std::string(alg), std::move(digest),
                              std::move(value)};
  hdr.write(out);
  return out;
}

bool verify_signature(const SoapEnvelope& env,
                      const RsaKeyPair& verifier_public) {
  SecurityHeader hdr = SecurityHeader::read(env);
  if (!hdr.signature) {
    throw Error(Err::NoSignaturePresent, "message carries no signature");
  }
  std::string_view digest_name = digest_name_for(hdr.signature->alg);
  if (digest_name.empty()) return false;
  std::string input = signing_input(hdr, env.body);
  if (digest_for(hdr.signature->alg, input) != hdr.signature->body_digest) {
    return false;
  }
  return verifier_public.verify(
      digest_name, reinterpret_cast<const uint8_t*>(input.data()),
      input.size(), hdr.signature->value);
}

SoapEnvelope encrypt_body(const SoapEnvelope& env, const KeyMaterial& recipient,
                          std::string_view transport, Rng& rng) {
  recipient.validate();
  if (is_cipher_data(env.body)) {
    throw Error(Err::CryptoFailure, "body is already encrypted");
  }
  if (!recipient.profile.allows_transport(transport)) {
    throw Error(Err::AlgorithmNotInProfile,
                std::string(transport) + " not in profile " +
                    recipient.profile.label());
  }
  Bytes key = rng.bytes(32);
  Bytes iv = rng.bytes(16);
  std::string plaintext = canonicalize(env.body);
  Bytes ciphertext = aes256_cbc_encrypt(
      key, iv,
      Bytes(plaintext.begin(), plaintext.end()));
  Bytes wrapped = recipient.rsa.wrap(key, transport == kAlgRsaOaep);

  SoapEnvelope out = env;
  out.body = make_cipher_data(iv, ciphertext);
  SecurityHeader hdr = SecurityHeader::read(out);
  hdr.encrypted_key = WsEncryptedKey{std::string(transport),
                                     std::move(wrapped)};
  hdr.write(out);
  return out;
}

SoapEnvelope decrypt_body(const SoapEnvelope& env,
                          const KeyMaterial& recipient) {
  if (!is_cipher_data(env.body)) {
    throw Error(Err::NotEncrypted, "body is not encrypted");
  }
  SecurityHeader hdr = SecurityHeader::read(env);
  if (!hdr.encrypted_key) {
    throw Error(Err::NotEncrypted, "no encrypted key in header");
  }
  if (!recipient.rsa.has_private()) {
    throw Error(Err::KeyUnwrapFailed,
                recipient.identity + " has no private key");
  }
  const std::string& transport = hdr.encrypted_key->transport_alg;
  bool oaep;
  if (transport == kAlgRsaPkcs1) {
    oaep = false;
  } else if (transport == kAlgRsaOaep) {
    oaep = true;
  } else {
    throw Error(Err::AlgorithmNotInProfile,
                "unknown key transport: " + transport);
  }
  Bytes key = recipient.rsa.unwrap(hdr.encrypted_key->wrapped_key, oaep);
  if (key.size() != 32) {
    throw Error(Err::KeyUnwrapFailed, "unwrapped key has wrong length");
  }

  const std::string* alg = env.body.attr_value(kAlgAttr);
  if (!alg || *alg != kAlgAes256Cbc) {
    throw Error(Err::AlgorithmNotInProfile, "unknown body cipher");
  }
  const XmlElement* iv_elem = env.body.find("IV");
  const XmlElement* ct_elem = env.body.find("CipherValue");
  if (!iv_elem || !ct_elem) {
    throw Error(Err::MalformedXml, "incomplete CipherData");
  }
  Bytes iv = base64_decode(iv_elem->text_content());
  if (iv.size() != 16) throw Error(Err::MalformedXml, "bad IV length");
  Bytes ciphertext = base64_decode(ct_elem->text_content());
  Bytes plaintext = aes256_cbc_decrypt(key, iv, ciphertext);

  SoapEnvelope out = env;
  out.body = parse_element(
      std::string_view(reinterpret_cast<const char*>(plaintext.data()),
                       plaintext.size()));
  hdr.encrypted_key.reset();
  hdr.write(out);
  return out;
}

SoapEnvelope insert_timestamp(const SoapEnvelope& env, int64_t created_ms,
                              int64_t lifetime_ms) {
  SoapEnvelope out = env;
  SecurityHeader hdr = SecurityHeader::read(out);
  hdr.timestamp = WsTimestamp{created_ms, created_ms + lifetime_ms};
  hdr.write(out);
  return out;
}

bool validate_timestamp(const SoapEnvelope& env, int64_t now_ms,
                        int64_t skew_ms) {
  SecurityHeader hdr = SecurityHeader::read(env);
  if (!hdr.timestamp) {
    throw Error(Err::NoTimestamp, "message carries no timestamp");
  }
  return hdr.timestamp->created_ms - skew_ms <= now_ms &&
         now_ms <= hdr.timestamp->expires_ms + skew_ms;
}

SoapEnvelope secure_outbound(const SoapEnvelope& env, const KeyMaterial& sender,
                             const KeyMaterial& recipient,
                             const SecurityProfile& profile, int64_t now_ms,
                             int64_t lifetime_ms, Rng& rng) {
  sender.validate();
  recipient.validate();
  if (!profile.allows_rsa_bits(sender.rsa.modulus_bits()) ||
      !profile.allows_rsa_bits(recipient.rsa.modulus_bits())) {
    throw Error(Err::AlgorithmNotInProfile,
                std::string("key size not admitted by profile ") +
                    profile.label());
  }
  if (!sender.profile.allows_signature(profile.default_signature())) {
    throw Error(Err::AlgorithmNotInProfile,
                std::string(profile.default_signature()) +
                    " not available to " + sender.identity);
  }
  if (!recipient.profile.allows_transport(profile.default_transport())) {
    throw Error(Err::AlgorithmNotInProfile,
                std::string(profile.default_transport()) +
                    " not available to " + recipient.identity);
  }
  SoapEnvelope out = insert_timestamp(env, now_ms, lifetime_ms);
  out = sign_envelope(out, sender, profile.default_signature());
  return encrypt_body(out, recipient, profile.default_transport(), rng);
}

OpenResult open_inbound(const SoapEnvelope& env, const KeyMaterial& recipient,
                        const RsaKeyPair& sender_public, int64_t now_ms,
                        int64_t skew_ms) {
  OpenResult result;
  result.env = env;
  if (is_cipher_data(result.env.body)) {
    result.env = decrypt_body(result.env, recipient);
  }
  result.verified = verify_signature(result.env, sender_public);
  SecurityHeader hdr = SecurityHeader::read(result.env);
  result.fresh =
      hdr.timestamp && validate_timestamp(result.env, now_ms, skew_ms);
  return result;
}

bool uses_only_mobile_algorithms(const SoapEnvelope& env) {
  const SecurityProfile& mobile = SecurityProfile::mobile();
  SecurityHeader hdr = SecurityHeader::read(env);
  if (hdr.signature && !mobile.allows_signature(hdr.signature->alg)) {
    return false;
  }
  if (hdr.encrypted_key &&
      !mobile.allows_transport(hdr.encrypted_key->transport_alg)) {
    return false;
  }
  if (is_cipher_data(env.body)) {
    const std::string* alg = env.body.attr_value(kAlgAttr);
    if (!alg || *alg != kAlgAes256Cbc) return false;
  }
  return true;
}

RsaKeyPair Keystore::key(const std::string& identity) const {
  fs::path priv = fs::path(dir_) / (identity + ".der");
  std::error_code ec;
  if (fs::exists(priv, ec)) {
    return RsaKeyPair::from_private_der(read_file_bytes(priv.string()));
  }
  fs::path pub = fs::path(dir_) / (identity + ".pub.der");
  if (fs::exists(pub, ec)) {
    return RsaKeyPair::from_public_der(read_file_bytes(pub.string()));
  }
  throw Error(Err::KeystoreError, "no key files for " + identity + " in " +
                                      dir_);
}

RsaKeyPair Keystore::public_key(const std::string& identity) const {
  fs::path pub = fs::path(dir_) / (identity + ".pub.der");
  std::error_code ec;
  if (fs::exists(pub, ec)) {
    return RsaKeyPair::from_public_der(read_file_bytes(pub.string()));
  }
  return key(identity).public_only();
}

KeyMaterial Keystore::material(const std::string& identity,
                               const SecurityProfile& profile) const {
  KeyMaterial m;
  m.identity = identity;
  m.rsa = key(identity);
  m.profile = profile;
  fs::path aes = fs::path(dir_) / (identity + ".aes");
  std::error_code ec;
  if (fs::exists(aes, ec)) {
    Bytes raw = read_file_bytes(aes.string());
    if (raw.size() != 32) {
      throw Error(Err::KeystoreError, identity + ".aes must hold 32 bytes");
    }
    std::array<uint8_t, 32> k{};
    std::copy(raw.begin(), raw.end(), k.begin());
    m.aes_key = k;
  }
  m.validate();
  return m;
}

bool Keystore::has(const std::string& identity) const {
  std::error_code ec;
  return fs::exists(fs::path(dir_) / (identity + ".der"), ec) ||
         fs::exists(fs::path(dir_) / (identity + ".pub.der"), ec);
}

void Keystore::generate(const std::string& dir, const std::string& identity,
                        int bits) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  RsaKeyPair pair = RsaKeyPair::generate(bits);
  write_file_bytes((fs::path(dir) / (identity + ".der")).string(),
                   pair.private_der());
  write_file_bytes((fs::path(dir) / (identity + ".pub.der")).string(),
                   pair.public_der());
}

}  // namespace mwsmf
