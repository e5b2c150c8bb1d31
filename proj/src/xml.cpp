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

#include "mwsmf/xml.hpp"

#include <algorithm>
#include <cctype>
#include <utility>

#include "mwsmf/errors.hpp"
#include "mwsmf/util.hpp"

namespace mwsmf {

namespace {

constexpr int kMaxDepth = 256;

std::vector<std::pair<std::string, std::string>>& prefix_table() {
  static std::vector<std::pair<std::string, std::string>> table = {
      {"env", kEnvNs}, {"wsse", kWsseNs}, {"ds", kDsNs}, {"xenc", kXencNs}};
  return table;
}

const std::string* uri_for_prefix(std::string_view prefix) {
  for (const auto& [p, uri] : prefix_table())
    if (p == prefix) return &uri;
  return nullptr;
}

const std::string* prefix_for_uri(std::string_view uri) {
  for (const auto& [p, u] : prefix_table())
    if (u == uri) return &p;
  return nullptr;
}

bool name_start_char(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
         c == '.';
}

bool valid_name(std::string_view s) {
  if (s.empty() || !name_start_char(s[0])) return false;
  return std::all_of(s.begin() + 1, s.end(), name_char);
}

bool all_whitespace(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  });
}

std::string qname_str(const QName& q) {
  if (q.ns.empty()) return q.local;
  const std::string* prefix = prefix_for_uri(q.ns);
  if (!prefix)
    throw Error(Err::MalformedXml, "unregistered namespace: " + q.ns);
  return *prefix + ":" + q.local;
}

class Parser {
 public:
  explicit Parser(std::string_view raw) : s_(raw) {}

  XmlElement run() {
    if (!utf8_valid(s_)) throw fail("input is not valid UTF-8");
    skip_ws();
    XmlElement root = element(0);
    skip_ws();
    if (pos_ != s_.size()) throw fail("content after document element");
    return root;
  }

 private:
  Error fail(const std::string& msg) const {
    return Error(Err::MalformedXml, msg + " at offset " + std::to_string(pos_));
  }

  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return s_[pos_]; }

  char take() {
    if (eof()) throw fail("unexpected end of input");
    return s_[pos_++];
  }

  void expect(char c) {
    if (eof() || s_[pos_] != c)
      throw fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r' ||
                      peek() == '\n'))
      ++pos_;
  }

  std::string raw_name() {
    size_t start = pos_;
    if (eof() || !name_start_char(peek())) throw fail("bad name start");
    ++pos_;
    while (!eof() && name_char(peek())) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  QName qname() {
    std::string first = raw_name();
    if (!eof() && peek() == ':') {
      ++pos_;
      std::string local = raw_name();
      const std::string* uri = uri_for_prefix(first);
      if (!uri) throw fail("unknown namespace prefix '" + first + "'");
      return QName(*uri, local);
    }
    return QName(first);
  }

  std::string decode_entity() {
    // called with pos_ on '&'
    size_t semi = s_.find(';', pos_);
    if (semi == std::string_view::npos || semi - pos_ > 5)
      throw fail("unterminated entity");
    std::string_view name = s_.substr(pos_ + 1, semi - pos_ - 1);
    ++pos_;  // '&'
    pos_ = semi + 1;
    if (name == "amp") return "&";
    if (name == "lt") return "<";
    if (name == "gt") return ">";
    if (name == "quot") return "\"";
    if (name == "apos") return "'";
    throw fail("unknown entity '&" + std::string(name) + ";'");
  }

  std::string attr_value() {
    expect('"');
    std::string out;
    while (true) {
      if (eof()) throw fail("unterminated attribute value");
      char c = peek();
      if (c == '"') {
        ++pos_;
        return out;
      }
      if (c == '<') throw fail("'<' in attribute value");
      if (c == '&') {
        out += decode_entity();
      } else {
        out += take();
      }
    }
  }

  std::string text_run() {
    std::string out;
    while (!eof() && peek() != '<') {
      if (peek() == '&')
        out += decode_entity();
      else
        out += take();
    }
    return out;
  }

  XmlElement element(int depth) {
    if (depth > kMaxDepth) throw fail("nesting too deep");
    expect('<');
    XmlElement elem(qname());
    while (true) {
      bool had_ws = !eof() && (peek() == ' ' || peek() == '\t' ||
                               peek() == '\r' || peek() == '\n');
      skip_ws();
      if (eof()) throw fail("unterminated start tag");
      if (peek() == '/') {
        ++pos_;
        expect('>');
        return elem;  // empty element
      }
      if (peek() == '>') {
        ++pos_;
        break;
      }
      if (!had_ws) throw fail("missing whitespace before attribute");
      QName an = qname();
      skip_ws();
      expect('=');
      skip_ws();
      std::string av = attr_value();
      if (!elem.attrs.emplace(an, std::move(av)).second)
        throw fail("duplicate attribute '" + an.local + "'");
    }
    // content until matching end tag
    while (true) {
      if (eof()) throw fail("missing end tag for '" + elem.name.local + "'");
      if (peek() == '<') {
        if (pos_ + 1 < s_.size() && s_[pos_ + 1] == '/') {
          pos_ += 2;
          QName closing = qname();
          skip_ws();
          expect('>');
          if (closing != elem.name)
            throw fail("mismatched end tag '" + closing.local + "'");
          return elem;
        }
        elem.children.emplace_back(element(depth + 1));
      } else {
        std::string text = text_run();
        if (!text.empty() && !all_whitespace(text))
          elem.children.emplace_back(std::move(text));
      }
    }
  }

  std::string_view s_;
  size_t pos_ = 0;
};

void canon_into(const XmlElement& elem, std::string& out) {
  out += '<';
  out += qname_str(elem.name);
  for (const auto& [name, value] : elem.attrs) {
    out += ' ';
    out += qname_str(name);
    out += "=\"";
    out += escape_attr(value);
    out += '"';
  }
  if (elem.children.empty()) {
    out += "/>";
    return;
  }
  out += '>';
  for (const XmlNode& node : elem.children) {
    if (node.is_element())
      canon_into(node.element(), out);
    else
      out += escape_text(node.text());
  }
  out += "</";
  out += qname_str(elem.name);
  out += '>';
}

}  // namespace

XmlElement::XmlElement(QName n, std::string text) : name(std::move(n)) {
  children.emplace_back(std::move(text));
}

XmlElement& XmlElement::attr(QName name, std::string value) {
  attrs[std::move(name)] = std::move(value);
  return *this;
}

XmlElement& XmlElement::child(XmlElement elem) {
  children.emplace_back(std::move(elem));
  return *this;
}

XmlElement& XmlElement::text(std::string t) {
  children.emplace_back(std::move(t));
  return *this;
}

const XmlElement* XmlElement::find(std::string_view local) const {
  for (const XmlNode& node : children)
    if (node.is_element() && node.element().name.local == local)
      return &node.element();
  return nullptr;
}

XmlElement* XmlElement::find(std::string_view local) {
  for (XmlNode& node : children)
    if (node.is_element() && node.element().name.local == local)
      return &node.element();
  return nullptr;
}

std::string XmlElement::text_content() const {
  std::string out;
  for (const XmlNode& node : children)
    if (!node.is_element()) out += node.text();
  return out;
}

const std::string* XmlElement::attr_value(const QName& name) const {
  auto it = attrs.find(name);
  return it == attrs.end() ? nullptr : &it->second;
}

void XmlElement::validate() const {
  if (!valid_name(name.local))
    throw Error(Err::MalformedXml, "bad element name '" + name.local + "'");
  if (!namespace_known(name.ns))
    throw Error(Err::MalformedXml, "unregistered namespace: " + name.ns);
  for (const auto& [an, av] : attrs) {
    if (!valid_name(an.local))
      throw Error(Err::MalformedXml, "bad attribute name '" + an.local + "'");
    if (!namespace_known(an.ns))
      throw Error(Err::MalformedXml, "unregistered namespace: " + an.ns);
    if (!utf8_valid(av))
      throw Error(Err::MalformedXml, "attribute value not valid UTF-8");
  }
  bool prev_text = false;
  for (const XmlNode& node : children) {
    if (node.is_element()) {
      node.element().validate();
      prev_text = false;
      continue;
    }
    const std::string& t = node.text();
    if (t.empty() || all_whitespace(t))
      throw Error(Err::MalformedXml, "empty or whitespace-only text node");
    if (!utf8_valid(t))
      throw Error(Err::MalformedXml, "text not valid UTF-8");
    if (prev_text) throw Error(Err::MalformedXml, "adjacent text nodes");
    prev_text = true;
  }
}

bool XmlElement::operator==(const XmlElement& other) const {
  return name == other.name && attrs == other.attrs &&
         children == other.children;
}

void register_namespace(const std::string& prefix, const std::string& uri) {
  if (!valid_name(prefix) || uri.empty())
    throw Error(Err::MalformedXml, "bad namespace registration");
  for (const auto& [p, u] : prefix_table())
    if (p == prefix || u == uri)
      throw Error(Err::MalformedXml, "prefix or URI already registered");
  prefix_table().emplace_back(prefix, uri);
}

bool namespace_known(std::string_view uri) {
  return uri.empty() || prefix_for_uri(uri) != nullptr;
}

XmlElement parse_element(std::string_view raw) { return Parser(raw).run(); }

std::string canonicalize(const XmlElement& elem) {
  std::string out;
  canon_into(elem, out);
  return out;
}

std::string escape_text(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string escape_attr(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace mwsmf
