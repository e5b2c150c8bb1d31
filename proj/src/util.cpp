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

#include "mwsmf/util.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mwsmf/errors.hpp"

namespace mwsmf {

const char* err_name(Err e) {
  switch (e) {
    case Err::MalformedXml: return "MalformedXml";
    case Err::NotAnEnvelope: return "NotAnEnvelope";
    case Err::AlgorithmNotInProfile: return "AlgorithmNotInProfile";
    case Err::KeyTooSmallForAlg: return "KeyTooSmallForAlg";
    case Err::NoSignaturePresent: return "NoSignaturePresent";
    case Err::KeyUnwrapFailed: return "KeyUnwrapFailed";
    case Err::PaddingInvalid: return "PaddingInvalid";
    case Err::NotEncrypted: return "NotEncrypted";
    case Err::NoTimestamp: return "NoTimestamp";
    case Err::CryptoFailure: return "CryptoFailure";
    case Err::KeystoreError: return "KeystoreError";
    case Err::DuplicateServiceId: return "DuplicateServiceId";
    case Err::InvalidRecord: return "InvalidRecord";
    case Err::NoSuperPeer: return "NoSuperPeer";
    case Err::NoUsableInterface: return "NoUsableInterface";
    case Err::UnknownPeer: return "UnknownPeer";
    case Err::PeerUnreachable: return "PeerUnreachable";
    case Err::ClockMovedBackwards: return "ClockMovedBackwards";
    case Err::PathConflict: return "PathConflict";
    case Err::FootprintExceeded: return "FootprintExceeded";
    case Err::HostSleeping: return "HostSleeping";
    case Err::BadMagic: return "BadMagic";
    case Err::WrongTarget: return "WrongTarget";
    case Err::NoRouteMatched: return "NoRouteMatched";
    case Err::SourceVerificationFailed: return "SourceVerificationFailed";
    case Err::ProfileUnsupported: return "ProfileUnsupported";
    case Err::UnknownHost: return "UnknownHost";
    case Err::HostUnreachable: return "HostUnreachable";
    case Err::Timeout: return "Timeout";
    case Err::ScenarioInvalid: return "ScenarioInvalid";
    case Err::NoData: return "NoData";
    case Err::IoError: return "IoError";
    case Err::Internal: return "Internal";
  }
  return "Unknown";
}

namespace {
const char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int b64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}
}  // namespace

std::string base64_encode(const uint8_t* data, size_t len) {
  std::string out;
  out.reserve((len + 2) / 3 * 4);
  size_t i = 0;
  for (; i + 3 <= len; i += 3) {
    uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
    out += kB64Alphabet[(v >> 18) & 63];
    out += kB64Alphabet[(v >> 12) & 63];
    out += kB64Alphabet[(v >> 6) & 63];
    out += kB64Alphabet[v & 63];
  }
  if (i + 1 == len) {
    uint32_t v = data[i] << 16;
    out += kB64Alphabet[(v >> 18) & 63];
    out += kB64Alphabet[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == len) {
    uint32_t v = (data[i] << 16) | (data[i + 1] << 8);
    out += kB64Alphabet[(v >> 18) & 63];
    out += kB64Alphabet[(v >> 12) & 63];
    out += kB64Alphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::string base64_encode(const Bytes& data) {
  return base64_encode(data.data(), data.size());
}

Bytes base64_decode(std::string_view text) {
  if (text.size() % 4 != 0)
    throw Error(Err::MalformedXml, "base64 length not a multiple of 4");
  Bytes out;
  out.reserve(text.size() / 4 * 3);
  for (size_t i = 0; i < text.size(); i += 4) {
    int pad = 0;
    uint32_t v = 0;
    for (int j = 0; j < 4; ++j) {
      char c = text[i + j];
      if (c == '=') {
        if (i + 4 != text.size() || j < 2)
          throw Error(Err::MalformedXml, "bad base64 padding");
        ++pad;
        v <<= 6;
        continue;
      }
      if (pad > 0) throw Error(Err::MalformedXml, "base64 data after padding");
      int d = b64_value(c);
      if (d < 0) throw Error(Err::MalformedXml, "bad base64 character");
      v = (v << 6) | static_cast<uint32_t>(d);
    }
    out.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
    if (pad < 2) out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
    if (pad < 1) out.push_back(static_cast<uint8_t>(v & 0xff));
  }
  return out;
}

std::string hex_encode(const uint8_t* data, size_t len) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (size_t i = 0; i < len; ++i) {
    out += digits[data[i] >> 4];
    out += digits[data[i] & 0xf];
  }
  return out;
}

std::string hex_encode(const Bytes& data) {
  return hex_encode(data.data(), data.size());
}

Bytes hex_decode(std::string_view text) {
  auto nib = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (text.size() % 2 != 0) throw Error(Err::MalformedXml, "odd hex length");
  Bytes out(text.size() / 2);
  for (size_t i = 0; i < out.size(); ++i) {
    int hi = nib(text[2 * i]), lo = nib(text[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(Err::MalformedXml, "bad hex digit");
    out[i] = static_cast<uint8_t>((hi << 4) | lo);
  }
  return out;
}

std::string percent_encode(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) {
    if (c == '%' || c == '\t' || c == '\r' || c == '\n') {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", c);
      out += buf;
    } else {
      out += static_cast<char>(c);
    }
  }
  return out;
}

std::string percent_decode(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size()) {
      auto hx = hex_decode(s.substr(i + 1, 2));
      out += static_cast<char>(hx[0]);
      i += 2;
    } else {
      out += s[i];
    }
  }
  return out;
}

uint64_t fnv1a64(std::string_view data) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool utf8_valid(std::string_view s) {
  size_t i = 0;
  while (i < s.size()) {
    unsigned char c = s[i];
    size_t n;
    uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xe0) == 0xc0) {
      n = 1;
      cp = c & 0x1f;
    } else if ((c & 0xf0) == 0xe0) {
      n = 2;
      cp = c & 0x0f;
    } else if ((c & 0xf8) == 0xf0) {
      n = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + n >= s.size()) return false;
    for (size_t j = 1; j <= n; ++j) {
      unsigned char cc = s[i + j];
      if ((cc & 0xc0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3f);
    }
    // overlong / surrogate / out-of-range checks
    if (n == 1 && cp < 0x80) return false;
    if (n == 2 && cp < 0x800) return false;
    if (n == 3 && cp < 0x10000) return false;
    if (cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff)) return false;
    i += n + 1;
  }
  return true;
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      break;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Err::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Bytes read_file_bytes(const std::string& path) {
  std::string s = read_file(path);
  return Bytes(s.begin(), s.end());
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Err::IoError, "cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(Err::IoError, "short write to " + path);
}

void write_file_bytes(const std::string& path, const Bytes& content) {
  write_file(path, std::string_view(
                       reinterpret_cast<const char*>(content.data()),
                       content.size()));
}

}  // namespace mwsmf
