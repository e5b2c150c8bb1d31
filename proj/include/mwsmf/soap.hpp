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

#ifndef MWSMF_SOAP_HPP
#define MWSMF_SOAP_HPP

#include <string>
#include <string_view>
#include <vector>

#include "mwsmf/xml.hpp"

namespace mwsmf {

/// SOAP message: ordered header blocks plus exactly one payload element.
/// The Envelope/Header/Body wrapping is version-neutral and reconstructed
/// on serialization.
///
/// The correlation token rides in a MessageId header block when the sender
/// sets one; otherwise it is derived from the canonical message bytes, so
/// equal messages carry equal tokens.
struct SoapEnvelope {
  std::vector<XmlElement> header_blocks;
  XmlElement body;

  SoapEnvelope() = default;
  explicit SoapEnvelope(XmlElement payload) : body(std::move(payload)) {}

  std::string message_id() const;
  SoapEnvelope& set_message_id(std::string token);

  const XmlElement* header(std::string_view local) const;
  XmlElement* header(std::string_view local);
  void remove_header(std::string_view local);
  XmlElement& put_header(XmlElement block);  // replaces same-local block

  /// Throws Error(NotAnEnvelope) on shape violations, Error(MalformedXml)
  /// on tree invariant violations.
  void validate() const;

  bool operator==(const SoapEnvelope&) const = default;
};

/// Parses UTF-8 bytes into an envelope. The output of serialize_envelope
/// re-parses to an equal value.
SoapEnvelope parse_envelope(std::string_view raw);

/// Canonical bytes; parse_envelope(serialize_envelope(e)) == e.
std::string serialize_envelope(const SoapEnvelope& env);

SoapEnvelope make_fault(std::string_view code, std::string_view reason);
bool is_fault(const SoapEnvelope& env);
std::string fault_code(const SoapEnvelope& env);  // "" when not a fault

/// HTTP-tunnel framing: a path (request) or status token (response), a
/// blank line, then the SOAP bytes.
struct RequestFrame {
  std::string path;
  std::string soap;

  std::string to_bytes() const;
  static RequestFrame parse(std::string_view raw);
};

enum class FrameStatus { Ok, Fault, Asleep };

const char* frame_status_name(FrameStatus s);

struct ResponseFrame {
  FrameStatus status = FrameStatus::Ok;
  std::string soap;

  std::string to_bytes() const;
  static ResponseFrame parse(std::string_view raw);
};

}  // namespace mwsmf

#endif  // MWSMF_SOAP_HPP
