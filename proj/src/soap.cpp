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

#include "mwsmf/soap.hpp"

#include <cstdio>

#include "mwsmf/errors.hpp"
#include "mwsmf/util.hpp"

namespace mwsmf {

namespace {

bool env_name(const QName& q, std::string_view local) {
  return q.local == local && (q.ns.empty() || q.ns == kEnvNs);
}

int count_security_blocks(const std::vector<XmlElement>& blocks) {
  int n = 0;
  for (const auto& b : blocks)
    if (b.name.local == "Security") ++n;
  return n;
}

}  // namespace

std::string SoapEnvelope::message_id() const {
  if (const XmlElement* mid = header("MessageId")) {
    std::string tok = mid->text_content();
    if (!tok.empty()) return tok;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(
                    fnv1a64(serialize_envelope(*this))));
  return std::string(buf);
}

SoapEnvelope& SoapEnvelope::set_message_id(std::string token) {
  if (XmlElement* mid = header("MessageId")) {
    mid->children.clear();
    mid->text(std::move(token));
    return *this;
  }
  XmlElement block{QName("MessageId"), std::move(token)};
  header_blocks.insert(header_blocks.begin(), std::move(block));
  return *this;
}

const XmlElement* SoapEnvelope::header(std::string_view local) const {
  for (const auto& b : header_blocks)
    if (b.name.local == local) return &b;
  return nullptr;
}

XmlElement* SoapEnvelope::header(std::string_view local) {
  for (auto& b : header_blocks)
    if (b.name.local == local) return &b;
  return nullptr;
}

void SoapEnvelope::remove_header(std::string_view local) {
  std::erase_if(header_blocks,
                [&](const XmlElement& b) { return b.name.local == local; });
}

XmlElement& SoapEnvelope::put_header(XmlElement block) {
  for (auto& b : header_blocks) {
    if (b.name.local == block.name.local) {
      b = std::move(block);
      return b;
    }
  }
  header_blocks.push_back(std::move(block));
  return header_blocks.back();
}

void SoapEnvelope::validate() const {
  if (body.name.local.empty())
    throw Error(Err::NotAnEnvelope, "missing or empty body payload");
  body.validate();
  for (const auto& b : header_blocks) b.validate();
  if (count_security_blocks(header_blocks) > 1)
    throw Error(Err::NotAnEnvelope, "more than one Security header block");
}

SoapEnvelope parse_envelope(std::string_view raw) {
  XmlElement root = parse_element(raw);
  if (!env_name(root.name, "Envelope"))
    throw Error(Err::NotAnEnvelope, "root element is not Envelope");
  if (!root.attrs.empty())
    throw Error(Err::NotAnEnvelope, "attributes on Envelope not supported");

  SoapEnvelope env;
  size_t idx = 0;
  auto next_child = [&]() -> XmlElement* {
    while (idx < root.children.size()) {
      XmlNode& node = root.children[idx];
      if (!node.is_element())
        throw Error(Err::NotAnEnvelope, "text content inside Envelope");
      return &node.element();
    }
    return nullptr;
  };

  XmlElement* child = next_child();
  if (child && env_name(child->name, "Header")) {
    if (!child->attrs.empty())
      throw Error(Err::NotAnEnvelope, "attributes on Header not supported");
    for (XmlNode& node : child->children) {
      if (!node.is_element())
        throw Error(Err::NotAnEnvelope, "text content inside Header");
      env.header_blocks.push_back(std::move(node.element()));
    }
    ++idx;
    child = next_child();
  }
  if (!child || !env_name(child->name, "Body"))
    throw Error(Err::NotAnEnvelope, "Envelope has no Body");
  if (!child->attrs.empty())
    throw Error(Err::NotAnEnvelope, "attributes on Body not supported");
  if (child->children.size() != 1 || !child->children[0].is_element())
    throw Error(Err::NotAnEnvelope, "Body must hold exactly one element");
  env.body = std::move(child->children[0].element());
  ++idx;
  if (idx != root.children.size())
    throw Error(Err::NotAnEnvelope, "unexpected content after Body");

  if (count_security_blocks(env.header_blocks) > 1)
    throw Error(Err::NotAnEnvelope, "more than one Security header block");
  return env;
}

std::string serialize_envelope(const SoapEnvelope& env) {
  env.validate();
  XmlElement root{QName("Envelope")};
  if (!env.header_blocks.empty()) {
    XmlElement header{QName("Header")};
    for (const auto& b : env.header_blocks) header.child(b);
    root.child(std::move(header));
  }
  XmlElement body{QName("Body")};
  body.child(env.body);
  root.child(std::move(body));
  return canonicalize(root);
}

SoapEnvelope make_fault(std::string_view code, std::string_view reason) {
  XmlElement fault{QName("Fault")};
  fault.child(XmlElement{QName("code"), std::string(code)});
  fault.child(XmlElement{QName("reason"), std::string(reason)});
  return SoapEnvelope(std::move(fault));
}

bool is_fault(const SoapEnvelope& env) {
  return env.body.name.local == "Fault";
}

std::string fault_code(const SoapEnvelope& env) {
  if (!is_fault(env)) return "";
  const XmlElement* code = env.body.find("code");
  return code ? code->text_content() : "";
}

namespace {

std::pair<std::string_view, std::string_view> split_frame(
    std::string_view raw) {
  size_t sep = raw.find("\n\n");
  if (sep == std::string_view::npos)
    throw Error(Err::MalformedXml, "frame missing blank-line separator");
  return {raw.substr(0, sep), raw.substr(sep + 2)};
}

}  // namespace

std::string RequestFrame::to_bytes() const { return path + "\n\n" + soap; }

RequestFrame RequestFrame::parse(std::string_view raw) {
  auto [head, rest] = split_frame(raw);
  if (head.empty() || head.find('\n') != std::string_view::npos)
    throw Error(Err::MalformedXml, "bad request frame path line");
  return RequestFrame{std::string(head), std::string(rest)};
}

const char* frame_status_name(FrameStatus s) {
  switch (s) {
    case FrameStatus::Ok: return "OK";
    case FrameStatus::Fault: return "FAULT";
    case FrameStatus::Asleep: return "ASLEEP";
  }
  return "OK";
}

std::string ResponseFrame::to_bytes() const {
  return std::string(frame_status_name(status)) + "\n\n" + soap;
}

ResponseFrame ResponseFrame::parse(std::string_view raw) {
  auto [head, rest] = split_frame(raw);
  ResponseFrame out;
  if (head == "OK")
    out.status = FrameStatus::Ok;
  else if (head == "FAULT")
    out.status = FrameStatus::Fault;
  else if (head == "ASLEEP")
    out.status = FrameStatus::Asleep;
  else
    throw Error(Err::MalformedXml, "bad response frame status token");
  out.soap = std::string(rest);
  return out;
}

}  // namespace mwsmf
