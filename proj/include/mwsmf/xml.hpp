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

#ifndef MWSMF_XML_HPP
#define MWSMF_XML_HPP

#include <compare>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mwsmf {

// Well-known namespaces; serialized with the fixed prefixes env/wsse/ds/xenc.
inline constexpr const char* kEnvNs =
    "http://schemas.xmlsoap.org/soap/envelope/";
inline constexpr const char* kWsseNs =
    "http://docs.oasis-open.org/wss/2004/01/"
    "oasis-200401-wss-wssecurity-secext-1.0.xsd";
inline constexpr const char* kDsNs = "http://www.w3.org/2000/09/xmldsig#";
inline constexpr const char* kXencNs = "http://www.w3.org/2001/04/xmlenc#";

/// Qualified name. An empty namespace URI means no-namespace.
struct QName {
  std::string ns;
  std::string local;

  QName() = default;
  QName(std::string_view local_name) : local(local_name) {}
  QName(std::string_view ns_uri, std::string_view local_name)
      : ns(ns_uri), local(local_name) {}

  auto operator<=>(const QName&) const = default;
};

struct XmlElement;

/// Child node: element or text. Whitespace-only and adjacent text nodes
/// never appear in a valid tree (see XmlElement invariants).
struct XmlNode;

/// Element tree in the simplified XML subset this project speaks. No
/// processing instructions, comments, CDATA or DTDs; the only entities
/// are the predefined escapes.
///
/// Invariants (checked by validate()):
///  - attribute names unique (enforced by the map)
///  - text content valid UTF-8, never empty, never whitespace-only
///  - no two adjacent text children (the parser merges them)
///  - namespace URIs limited to "" or a registered namespace
struct XmlElement {
  QName name;
  std::map<QName, std::string> attrs;
  std::vector<XmlNode> children;

  XmlElement() = default;
  explicit XmlElement(QName n) : name(std::move(n)) {}
  XmlElement(QName n, std::string text);

  XmlElement& attr(QName name, std::string value);
  XmlElement& child(XmlElement elem);
  XmlElement& text(std::string t);

  /// First child element with the given local name, or nullptr.
  const XmlElement* find(std::string_view local) const;
  XmlElement* find(std::string_view local);
  /// Concatenated text children.
  std::string text_content() const;
  const std::string* attr_value(const QName& name) const;

  /// Throws Error(MalformedXml) when an invariant is broken.
  void validate() const;

  bool operator==(const XmlElement&) const;
};

struct XmlNode : std::variant<XmlElement, std::string> {
  using variant::variant;
  bool is_element() const { return index() == 0; }
  const XmlElement& element() const { return std::get<XmlElement>(*this); }
  XmlElement& element() { return std::get<XmlElement>(*this); }
  const std::string& text() const { return std::get<std::string>(*this); }
};

/// Registers an application prefix for serialization/parsing. Call at
/// startup only; the table is global and not synchronized.
void register_namespace(const std::string& prefix, const std::string& uri);
/// True when the URI is empty or present in the prefix table.
bool namespace_known(std::string_view uri);

/// Parses one element in the simplified grammar. Throws Error(MalformedXml).
XmlElement parse_element(std::string_view raw);

/// Canonical byte form: attributes sorted by (namespace URI, local name),
/// no insignificant whitespace, `<x/>` for empty elements, text escaped
/// for & < > (plus " in attribute values). Structurally equal elements
/// always canonicalize to identical bytes.
std::string canonicalize(const XmlElement& elem);

std::string escape_text(std::string_view s);
std::string escape_attr(std::string_view s);

}  // namespace mwsmf

#endif  // MWSMF_XML_HPP
