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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <gmp.h>

#include <cstring>
#include <random>
#include <string>

#include "mwsmf/crypto.hpp"
#include "mwsmf/errors.hpp"
#include "mwsmf/rng.hpp"
#include "mwsmf/soap.hpp"
#include "mwsmf/util.hpp"
#include "mwsmf/wssec.hpp"

using namespace mwsmf;

// ---------------------------------------------------------------------------
// Reference implementations, independent of the library under test. The RSA
// oracle does schoolbook modular exponentiation over GMP integers with its
// own SHA-1 and EMSA-PKCS1-v1_5 encoder, parsing the key out of the DER
// directly.

namespace ref {

// Compact SHA-1 (FIPS 180-4), used only to feed the signature oracle.
struct Sha1 {
  uint32_t h[5] = {0x67452301, 0xEFCDAB89, 0x98BADCFE, 0x10325476,
                   0xC3D2E1F0};
  uint8_t block[64];
  size_t block_len = 0;
  uint64_t total = 0;

  static uint32_t rol(uint32_t v, int s) { return (v << s) | (v >> (32 - s)); }

  void compress() {
    uint32_t w[80];
    for (int i = 0; i < 16; ++i) {
      w[i] = (uint32_t(block[i * 4]) << 24) | (uint32_t(block[i * 4 + 1]) << 16) |
             (uint32_t(block[i * 4 + 2]) << 8) | uint32_t(block[i * 4 + 3]);
    }
    for (int i = 16; i < 80; ++i)
      w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
    uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
    for (int i = 0; i < 80; ++i) {
      uint32_t f, k;
      if (i < 20) { f = (b & c) | (~b & d); k = 0x5A827999; }
      else if (i < 40) { f = b ^ c ^ d; k = 0x6ED9EBA1; }
      else if (i < 60) { f = (b & c) | (b & d) | (c & d); k = 0x8F1BBCDC; }
      else { f = b ^ c ^ d; k = 0xCA62C1D6; }
      uint32_t t = rol(a, 5) + f + e + k + w[i];
      e = d; d = c; c = rol(b, 30); b = a; a = t;
    }
    h[0] += a; h[1] += b; h[2] += c; h[3] += d; h[4] += e;
  }

  void update(const uint8_t* data, size_t len) {
    total += len;
    while (len > 0) {
      size_t take = std::min(len, sizeof(block) - block_len);
      std::memcpy(block + block_len, data, take);
      block_len += take;
      data += take;
      len -= take;
      if (block_len == 64) { compress(); block_len = 0; }
    }
  }

  Bytes finish() {
    uint64_t bits = total * 8;
    uint8_t pad = 0x80;
    update(&pad, 1);
    uint8_t zero = 0;
    while (block_len != 56) update(&zero, 1);
    uint8_t lenbuf[8];
    for (int i = 0; i < 8; ++i) lenbuf[i] = uint8_t(bits >> (56 - 8 * i));
    update(lenbuf, 8);
    Bytes out(20);
    for (int i = 0; i < 5; ++i) {
      out[i * 4] = uint8_t(h[i] >> 24);
      out[i * 4 + 1] = uint8_t(h[i] >> 16);
      out[i * 4 + 2] = uint8_t(h[i] >> 8);
      out[i * 4 + 3] = uint8_t(h[i]);
    }
    return out;
  }
};

Bytes sha1(const uint8_t* data, size_t len) {
  Sha1 s;
  s.update(data, len);
  return s.finish();
}

// Minimal DER walker for the RSAPrivateKey layout: a SEQUENCE of INTEGERs
// (version, n, e, d, ...).
struct Der {
  const uint8_t* p;
  const uint8_t* end;

  uint8_t tag() {
    REQUIRE(p < end);
    return *p;
  }

  size_t read_header(uint8_t expect_tag) {
    REQUIRE(p < end);
    REQUIRE(*p == expect_tag);
    ++p;
    REQUIRE(p < end);
    size_t len = *p++;
    if (len & 0x80) {
      size_t n = len & 0x7f;
      REQUIRE(n <= 4);
      len = 0;
      for (size_t i = 0; i < n; ++i) {
        REQUIRE(p < end);
        len = (len << 8) | *p++;
      }
    }
    REQUIRE(size_t(end - p) >= len);
    return len;
  }

  void read_integer(mpz_t out) {
    size_t len = read_header(0x02);
    mpz_import(out, len, 1, 1, 1, 0, p);
    p += len;
  }
};

struct RsaParts {
  mpz_t n, d;
  RsaParts() { mpz_inits(n, d, nullptr); }
  ~RsaParts() { mpz_clears(n, d, nullptr); }
};

// Extracts modulus and private exponent from private-key DER bytes,
// accepting both the bare RSAPrivateKey layout and the PKCS#8 wrapper.
void parse_private(const Bytes& der, RsaParts& out) {
  Der c{der.data(), der.data() + der.size()};
  c.read_header(0x30);
  mpz_t version, e;
  mpz_inits(version, e, nullptr);
  c.read_integer(version);
  if (c.tag() == 0x30) {
    // PKCS#8: skip AlgorithmIdentifier, descend into the OCTET STRING.
    size_t alg_len = c.read_header(0x30);
    c.p += alg_len;
    c.read_header(0x04);
    c.read_header(0x30);
    c.read_integer(version);
  }
  REQUIRE(mpz_cmp_ui(version, 0) == 0);
  c.read_integer(out.n);
  c.read_integer(e);
  c.read_integer(out.d);
  mpz_clears(version, e, nullptr);
}

// EMSA-PKCS1-v1_5 for SHA-1 followed by s = m^d mod n.
Bytes sign_sha1(const Bytes& der, const uint8_t* data, size_t len) {
  RsaParts key;
  parse_private(der, key);
  size_t k = (mpz_sizeinbase(key.n, 2) + 7) / 8;

  static const uint8_t kDigestInfo[] = {0x30, 0x21, 0x30, 0x09, 0x06,
                                        0x05, 0x2b, 0x0e, 0x03, 0x02,
                                        0x1a, 0x05, 0x00, 0x04, 0x14};
  Bytes digest = sha1(data, len);
  Bytes em(k, 0xff);
  em[0] = 0x00;
  em[1] = 0x01;
  size_t t_len = sizeof(kDigestInfo) + digest.size();
  em[k - t_len - 1] = 0x00;
  std::memcpy(em.data() + k - t_len, kDigestInfo, sizeof(kDigestInfo));
  std::memcpy(em.data() + k - digest.size(), digest.data(), digest.size());

  mpz_t m, s;
  mpz_inits(m, s, nullptr);
  mpz_import(m, em.size(), 1, 1, 1, 0, em.data());
  mpz_powm(s, m, key.d, key.n);

  // Left-pad the exported value to the modulus size.
  Bytes sig(k, 0);
  Bytes scratch(k);
  size_t written = 0;
  mpz_export(scratch.data(), &written, 1, 1, 1, 0, s);
  std::memcpy(sig.data() + (k - written), scratch.data(), written);
  mpz_clears(m, s, nullptr);
  return sig;
}

}  // namespace ref

// ---------------------------------------------------------------------------

TEST_CASE("digest known answers") {
  CHECK(hex_encode(sha1("abc")) == "a9993e364706816aba3e25717850c26c9cd0d89d");
  CHECK(hex_encode(sha256("abc")) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(hex_encode(sha1("")) == "da39a3ee5e6b4b0d3255bfef95601890afd80709");
}

TEST_CASE("reference SHA-1 agrees with the library") {
  std::mt19937_64 g(1);
  for (int i = 0; i < 50; ++i) {
    size_t len = g() % 300;
    Bytes data(len);
    for (auto& b : data) b = uint8_t(g());
    CHECK(ref::sha1(data.data(), data.size()) == sha1(data.data(), data.size()));
  }
}

// SP 800-38A F.2.5/F.2.6: CBC-AES256 encryption and decryption vectors.
TEST_CASE("AES-256-CBC published vectors") {
  Bytes key = hex_decode(
      "603deb1015ca71be2b73aef0857d77811f352c073b6108d72d9810a30914dff4");
  Bytes iv = hex_decode("000102030405060708090a0b0c0d0e0f");
  Bytes pt = hex_decode(
      "6bc1bee22e409f96e93d7e117393172a"
      "ae2d8a571e03ac9c9eb76fac45af8e51"
      "30c81c46a35ce411e5fbc1191a0a52ef"
      "f69f2445df4f9b17ad2b417be66c3710");
  Bytes ct = hex_decode(
      "f58c4c04d6e5f1ba779eabfb5f7bfbd6"
      "9cfc4e967edb808d679f777bc6702c7d"
      "39f23369a9d9bacfa530e26304231461"
      "b2eb05e2c39be9fcda6c19078c6a9d1b");
  CHECK(aes256_cbc_encrypt_raw(key, iv, pt) == ct);
  CHECK(aes256_cbc_decrypt_raw(key, iv, ct) == pt);
}

TEST_CASE("AES padding round-trip and rejection") {
  Bytes key(32, 0x42);
  Bytes iv(16, 0x17);
  for (size_t len : {size_t(0), size_t(1), size_t(15), size_t(16), size_t(17),
                     size_t(255)}) {
    Bytes pt(len);
    for (size_t i = 0; i < len; ++i) pt[i] = uint8_t(i * 7 + 1);
    Bytes ct = aes256_cbc_encrypt(key, iv, pt);
    CHECK(ct.size() % 16 == 0);
    CHECK(ct.size() == (len / 16 + 1) * 16);
    CHECK(aes256_cbc_decrypt(key, iv, ct) == pt);
  }

  Bytes ct = aes256_cbc_encrypt(key, iv, Bytes{1, 2, 3});
  Bytes wrong_key(32, 0x43);
  CHECK_THROWS_AS(aes256_cbc_decrypt(wrong_key, iv, ct), Error);
}

TEST_CASE("RSA signatures match the arithmetic oracle") {
  std::mt19937_64 g(7);
  for (int bits : {1024, 2048}) {
    RsaKeyPair key = RsaKeyPair::generate(bits);
    Bytes der = key.private_der();
    for (int i = 0; i < 8; ++i) {
      size_t len = 1 + g() % 500;
      Bytes msg(len);
      for (auto& b : msg) b = uint8_t(g());
      Bytes ours = key.sign("sha1", msg.data(), msg.size());
      Bytes oracle = ref::sign_sha1(der, msg.data(), msg.size());
      CHECK(ours == oracle);
      CHECK(key.verify("sha1", msg.data(), msg.size(), oracle));
    }
  }
}

TEST_CASE("RSA verify rejects mismatches") {
  RsaKeyPair key = RsaKeyPair::generate(1024);
  Bytes msg{1, 2, 3, 4};
  Bytes sig = key.sign("sha256", msg.data(), msg.size());
  CHECK(key.verify("sha256", msg.data(), msg.size(), sig));
  Bytes other{9, 9, 9};
  CHECK(!key.verify("sha256", other.data(), other.size(), sig));
  Bytes mangled = sig;
  mangled[4] ^= 0x01;
  CHECK(!key.verify("sha256", msg.data(), msg.size(), mangled));
  // Cross-algorithm confusion must fail too.
  CHECK(!key.verify("sha1", msg.data(), msg.size(), sig));
}

TEST_CASE("key transport round-trips and rejects the wrong key") {
  RsaKeyPair a = RsaKeyPair::generate(1024);
  RsaKeyPair b = RsaKeyPair::generate(1024);
  Bytes secret(32, 0xAB);
  for (bool oaep : {false, true}) {
    Bytes wrapped = a.wrap(secret, oaep);
    CHECK(a.unwrap(wrapped, oaep) == secret);
    CHECK_THROWS_AS(b.unwrap(wrapped, oaep), Error);
  }
}

TEST_CASE("DER round-trips preserve the key") {
  RsaKeyPair key = RsaKeyPair::generate(1024);
  RsaKeyPair priv = RsaKeyPair::from_private_der(key.private_der());
  RsaKeyPair pub = RsaKeyPair::from_public_der(key.public_der());
  CHECK(priv.has_private());
  CHECK(!pub.has_private());
  CHECK(key.same_public_key(priv));
  CHECK(key.same_public_key(pub));
  CHECK(key.modulus_bits() == 1024);

  Bytes msg{5, 6, 7};
  Bytes sig = priv.sign("sha1", msg.data(), msg.size());
  CHECK(pub.verify("sha1", msg.data(), msg.size(), sig));
}

// ---------------------------------------------------------------------------
// Profiles.

TEST_CASE("profile algorithm envelopes") {
  const SecurityProfile& m = SecurityProfile::mobile();
  const SecurityProfile& f = SecurityProfile::full();

  CHECK(m.allows_signature(kAlgRsaSha1));
  CHECK(!m.allows_signature(kAlgRsaSha256));
  CHECK(m.allows_transport(kAlgRsaPkcs1));
  CHECK(!m.allows_transport(kAlgRsaOaep));
  CHECK(m.allows_rsa_bits(1024));
  CHECK(!m.allows_rsa_bits(2048));

  CHECK(f.allows_signature(kAlgRsaSha1));
  CHECK(f.allows_signature(kAlgRsaSha256));
  CHECK(f.allows_transport(kAlgRsaPkcs1));
  CHECK(f.allows_transport(kAlgRsaOaep));
  CHECK(f.allows_rsa_bits(1024));
  CHECK(f.allows_rsa_bits(2048));

  CHECK(m.default_signature() == kAlgRsaSha1);
  CHECK(m.default_transport() == kAlgRsaPkcs1);
  CHECK(f.default_signature() == kAlgRsaSha256);
  CHECK(f.default_transport() == kAlgRsaOaep);

  CHECK(SecurityProfile::by_name("MOBILE") == m);
  CHECK(SecurityProfile::by_name("FULL") == f);
  CHECK_THROWS_AS(SecurityProfile::by_name("TURBO"), Error);
  CHECK(std::string(m.label()) == "MOBILE");
}

TEST_CASE("key material validates modulus against profile") {
  KeyMaterial m;
  m.identity = "c";
  m.rsa = RsaKeyPair::generate(2048);
  m.profile = SecurityProfile::mobile();
  CHECK_THROWS_AS(m.validate(), Error);
  m.profile = SecurityProfile::full();
  m.validate();

  KeyMaterial small;
  small.identity = "s";
  small.rsa = RsaKeyPair::generate(1024);
  small.profile = SecurityProfile::mobile();
  small.validate();
  small.profile = SecurityProfile::full();
  small.validate();
}

// ---------------------------------------------------------------------------
// Envelope security.

namespace {

SoapEnvelope make_msg(const std::string& text) {
  XmlElement body{QName("GetPhoto")};
  body.child(XmlElement{QName("id"), text});
  return SoapEnvelope{std::move(body)};
}

KeyMaterial make_material(const std::string& id, int bits,
                          const SecurityProfile& profile) {
  KeyMaterial m;
  m.identity = id;
  m.rsa = RsaKeyPair::generate(bits);
  m.profile = profile;
  return m;
}

}  // namespace

TEST_CASE("sign and verify an envelope") {
  KeyMaterial signer = make_material("host", 1024, SecurityProfile::mobile());
  SoapEnvelope env = make_msg("p1");
  SoapEnvelope signed_env = sign_envelope(env, signer, kAlgRsaSha1);
  CHECK(verify_signature(signed_env, signer.rsa));

  SoapEnvelope tampered = signed_env;
  tampered.body.find("id")->children.clear();
  tampered.body.find("id")->text("p2");
  CHECK(!verify_signature(tampered, signer.rsa));

  CHECK_THROWS_AS(verify_signature(env, signer.rsa), Error);  // unsigned
  CHECK_THROWS_AS(sign_envelope(env, signer, kAlgRsaSha256), Error);
}

TEST_CASE("encrypt and decrypt a body") {
  Rng rng(99);
  KeyMaterial to = make_material("host", 1024, SecurityProfile::mobile());
  SoapEnvelope env = make_msg("secret-id");
  SoapEnvelope enc = encrypt_body(env, to, kAlgRsaPkcs1, rng);
  CHECK(is_cipher_data(enc.body));
  std::string wire = serialize_envelope(enc);
  CHECK(wire.find("secret-id") == std::string::npos);
  SoapEnvelope dec = decrypt_body(enc, to);
  CHECK(dec.body == env.body);

  KeyMaterial other = make_material("other", 1024, SecurityProfile::mobile());
  CHECK_THROWS_AS(decrypt_body(enc, other), Error);
  CHECK_THROWS_AS(decrypt_body(env, to), Error);  // not encrypted
  CHECK_THROWS_AS(encrypt_body(env, to, kAlgRsaOaep, rng), Error);
}

TEST_CASE("timestamp freshness") {
  SoapEnvelope env = make_msg("x");
  CHECK_THROWS_AS(validate_timestamp(env, 0, 0), Error);
  SoapEnvelope stamped = insert_timestamp(env, 1000, 5000);
  CHECK(validate_timestamp(stamped, 1000, 0));
  CHECK(validate_timestamp(stamped, 6000, 0));
  CHECK(!validate_timestamp(stamped, 6001, 0));
  CHECK(!validate_timestamp(stamped, 900, 0));    // from the future
  CHECK(validate_timestamp(stamped, 900, 200));   // within skew
  CHECK(validate_timestamp(stamped, 6100, 200));  // skewed expiry
}

TEST_CASE("secure_outbound polices both parties' profiles") {
  Rng rng(3);
  KeyMaterial full_client = make_material("c", 2048, SecurityProfile::full());
  KeyMaterial mobile_host = make_material("h", 1024, SecurityProfile::mobile());
  // FULL algorithms toward a MOBILE-only party are refused...
  CHECK_THROWS_AS(secure_outbound(make_msg("x"), full_client, mobile_host,
                                  SecurityProfile::full(), 0, 300000, rng),
                  Error);
  // ...and a 2048-bit key cannot participate in a MOBILE exchange at all.
  CHECK_THROWS_AS(secure_outbound(make_msg("x"), full_client, mobile_host,
                                  SecurityProfile::mobile(), 0, 300000, rng),
                  Error);
}

TEST_CASE("secured round-trips across both profiles") {
  Rng rng(20260818);
  std::mt19937_64 g(20260818);
  KeyMaterial mobile_a = make_material("ma", 1024, SecurityProfile::mobile());
  KeyMaterial mobile_b = make_material("mb", 1024, SecurityProfile::mobile());
  KeyMaterial full_a = make_material("fa", 2048, SecurityProfile::full());
  KeyMaterial full_b = make_material("fb", 2048, SecurityProfile::full());

  const std::string alphabet =
      "abcdefghijklmnopqrstuvwxyz0123456789 &<>\"'~#";
  int rounds = 1000;
  for (int i = 0; i < rounds; ++i) {
    size_t len = 1 + g() % 2000;
    std::string payload;
    payload.reserve(len);
    for (size_t j = 0; j < len; ++j) payload += alphabet[g() % alphabet.size()];

    bool use_full = g() % 2 == 0;
    const KeyMaterial& sender = use_full ? full_a : mobile_a;
    const KeyMaterial& recipient = use_full ? full_b : mobile_b;
    const SecurityProfile& profile =
        use_full ? SecurityProfile::full() : SecurityProfile::mobile();

    SoapEnvelope msg = make_msg(payload);
    int64_t now = int64_t(g() % 1000000);
    SoapEnvelope secured =
        secure_outbound(msg, sender, recipient, profile, now, 300000, rng);

    // Across the wire and back.
    SoapEnvelope arrived = parse_envelope(serialize_envelope(secured));
    OpenResult opened =
        open_inbound(arrived, recipient, sender.rsa, now + 10, 300000);
    REQUIRE(opened.verified);
    REQUIRE(opened.fresh);
    CHECK(opened.env.body == msg.body);

    SecurityHeader hdr = SecurityHeader::read(arrived);
    REQUIRE(hdr.signature);
    REQUIRE(hdr.encrypted_key);
    CHECK(hdr.signature->alg == profile.default_signature());
    CHECK(hdr.encrypted_key->transport_alg == profile.default_transport());
    CHECK(uses_only_mobile_algorithms(arrived) == !use_full);
  }
}

TEST_CASE("single-bit tampering is never accepted") {
  Rng rng(555);
  std::mt19937_64 g(555);
  KeyMaterial sender = make_material("s", 1024, SecurityProfile::mobile());
  KeyMaterial recipient = make_material("r", 1024, SecurityProfile::mobile());

  SoapEnvelope msg = make_msg("the-protected-payload");
  SoapEnvelope secured = secure_outbound(msg, sender, recipient,
                                         SecurityProfile::mobile(), 1000,
                                         300000, rng);

  // Flip one bit in the ciphertext, the signature value, or the wrapped
  // key; none of the three may yield a silently accepted altered body.
  int accepted = 0;
  int flips = 402;
  for (int i = 0; i < flips; ++i) {
    SoapEnvelope bent = secured;
    SecurityHeader hdr = SecurityHeader::read(bent);
    REQUIRE(hdr.signature);
    REQUIRE(hdr.encrypted_key);
    XmlElement* ct = bent.body.find("CipherValue");
    REQUIRE(ct != nullptr);
    Bytes cipher = base64_decode(ct->text_content());

    Bytes* target = nullptr;
    switch (i % 3) {
      case 0: target = &cipher; break;
      case 1: target = &hdr.signature->value; break;
      default: target = &hdr.encrypted_key->wrapped_key; break;
    }
    size_t pos = g() % target->size();
    (*target)[pos] ^= uint8_t(1u << (g() % 8));
    if (i % 3 == 0) {
      ct->children.clear();
      ct->text(base64_encode(cipher));
    }
    hdr.write(bent);

    try {
      SoapEnvelope arrived = parse_envelope(serialize_envelope(bent));
      OpenResult opened = open_inbound(arrived, recipient, sender.rsa, 1010,
                                       300000);
      if (opened.verified && opened.fresh && opened.env.body == msg.body) {
        ++accepted;
      }
    } catch (const Error&) {
      // Rejected outright: fine.
    }
  }
  CHECK(accepted == 0);
}

TEST_CASE("stale and future timestamps are flagged not fresh") {
  Rng rng(8);
  KeyMaterial s = make_material("s", 1024, SecurityProfile::mobile());
  KeyMaterial r = make_material("r", 1024, SecurityProfile::mobile());
  SoapEnvelope secured = secure_outbound(make_msg("x"), s, r,
                                         SecurityProfile::mobile(), 1000, 500,
                                         rng);
  OpenResult late = open_inbound(secured, r, s.rsa, 999999, 0);
  CHECK(late.verified);
  CHECK(!late.fresh);
  OpenResult early = open_inbound(secured, r, s.rsa, 0, 0);
  CHECK(!early.fresh);
}

TEST_CASE("security header element round-trip") {
  SecurityHeader hdr;
  hdr.timestamp = WsTimestamp{100, 400};
  hdr.signature = WsSignature{"rsa-sha1", Bytes{1, 2}, Bytes{3, 4, 5}};
  hdr.encrypted_key = WsEncryptedKey{"rsa-pkcs1-15", Bytes{6, 7}};
  hdr.token_ref = "client1";
  hdr.credential = "deadbeef";

  SecurityHeader back = SecurityHeader::from_element(hdr.to_element());
  REQUIRE(back.timestamp);
  CHECK(back.timestamp->created_ms == 100);
  CHECK(back.timestamp->expires_ms == 400);
  REQUIRE(back.signature);
  CHECK(back.signature->alg == "rsa-sha1");
  CHECK(back.signature->value == Bytes{3, 4, 5});
  REQUIRE(back.encrypted_key);
  CHECK(back.encrypted_key->wrapped_key == Bytes{6, 7});
  CHECK(back.token_ref == "client1");
  CHECK(back.credential == "deadbeef");

  SoapEnvelope env = make_msg("x");
  CHECK(SecurityHeader::read(env).empty());
  hdr.write(env);
  CHECK(!SecurityHeader::read(env).empty());
}

TEST_CASE("keystore generates and serves key material") {
  std::string dir = "ks-test-dir";
  Keystore::generate(dir, "party", 1024);
  Keystore ks(dir);
  CHECK(ks.has("party"));
  CHECK(!ks.has("stranger"));

  RsaKeyPair priv = ks.key("party");
  CHECK(priv.has_private());
  CHECK(priv.modulus_bits() == 1024);
  RsaKeyPair pub = ks.public_key("party");
  CHECK(!pub.has_private());
  CHECK(priv.same_public_key(pub));

  KeyMaterial mat = ks.material("party", SecurityProfile::mobile());
  CHECK(mat.identity == "party");
  CHECK(mat.profile == SecurityProfile::mobile());

  CHECK_THROWS_AS(ks.key("stranger"), Error);
}
