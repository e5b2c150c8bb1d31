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

#include "mwsmf/registry.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <mutex>

#include "mwsmf/errors.hpp"
#include "mwsmf/util.hpp"

namespace mwsmf {

namespace {

// List items live inside a tab-separated field and are comma/equals
// joined, so those characters get encoded too.
std::string encode_item(const std::string& s) {
  std::string enc = percent_encode(s);
  std::string out;
  out.reserve(enc.size());
  for (char c : enc) {
    if (c == ',') {
      out += "%2C";
    } else if (c == '=') {
      out += "%3D";
    } else {
      out += c;
    }
  }
  return out;
}

std::string encode_keywords(const std::set<std::string>& kws) {
  std::vector<std::string> parts;
  parts.reserve(kws.size());
  for (const auto& k : kws) parts.push_back(encode_item(k));
  return join(parts, ',');
}

std::set<std::string> decode_keywords(const std::string& field) {
  std::set<std::string> out;
  if (field.empty()) return out;
  for (const auto& part : split(field, ',')) {
    out.insert(percent_decode(part));
  }
  return out;
}

std::string encode_attrs(const std::map<std::string, std::string>& attrs) {
  std::vector<std::string> parts;
  parts.reserve(attrs.size());
  for (const auto& [k, v] : attrs) {
    parts.push_back(encode_item(k) + "=" + encode_item(v));
  }
  return join(parts, ',');
}

std::map<std::string, std::string> decode_attrs(const std::string& field) {
  std::map<std::string, std::string> out;
  if (field.empty()) return out;
  for (const auto& part : split(field, ',')) {
    auto eq = part.find('=');
    if (eq == std::string::npos) {
      throw Error(Err::InvalidRecord, "bad attribute item: " + part);
    }
    out[percent_decode(part.substr(0, eq))] =
        percent_decode(part.substr(eq + 1));
  }
  return out;
}

int64_t decode_ms(const std::string& field) {
  int64_t v = 0;
  auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || p != field.data() + field.size()) {
    throw Error(Err::InvalidRecord, "bad timestamp field: " + field);
  }
  return v;
}

std::set<std::string> lowercase_set(const std::set<std::string>& in) {
  std::set<std::string> out;
  for (const auto& s : in) out.insert(lowercase(s));
  return out;
}

bool keywords_clause(const std::set<std::string>& have,
                     const std::set<std::string>& want) {
  if (want.empty()) return true;
  for (const auto& k : want) {
    if (have.count(lowercase(k))) return true;
  }
  return false;
}

bool context_clause(const std::map<std::string, std::string>& attrs,
                    const std::map<std::string, std::string>& filters) {
  for (const auto& [k, v] : filters) {
    auto it = attrs.find(k);
    if (it == attrs.end() || it->second != v) return false;
  }
  return true;
}

}  // namespace

void ServiceRecord::validate() const {
  if (service_id.empty()) {
    throw Error(Err::InvalidRecord, "service record without id");
  }
  if (keywords.empty()) {
    throw Error(Err::InvalidRecord, service_id + ": keywords must be non-empty");
  }
}

void ModuleAdvertisement::validate() const {
  if (module_id.empty()) {
    throw Error(Err::InvalidRecord, "advertisement without id");
  }
  if (pipe_id.empty() || provider_peer.empty()) {
    throw Error(Err::InvalidRecord,
                module_id + ": advertisement must carry pipe and provider");
  }
}

void DiscoveryQuery::validate() const {
  if (keywords.empty() && context_filters.empty()) {
    throw Error(Err::InvalidRecord, "query with neither keywords nor filters");
  }
}

bool matches(const ServiceRecord& rec, const DiscoveryQuery& q) {
  return keywords_clause(rec.keywords, q.keywords) &&
         context_clause({}, q.context_filters);
}

bool matches(const ModuleAdvertisement& adv, const DiscoveryQuery& q,
             int64_t now_ms) {
  if (!q.include_expired && adv.expires_at < now_ms) return false;
  return keywords_clause(adv.keywords, q.keywords) &&
         context_clause(adv.context_attrs, q.context_filters);
}

Registry::Registry(std::string journal_path)
    : journal_path_(std::move(journal_path)) {
  load_journal();
}

std::string Registry::publish_service(ServiceRecord rec) {
  rec.keywords = lowercase_set(rec.keywords);
  rec.validate();
  std::unique_lock lock(mu_);
  if (services_.count(rec.service_id)) {
    throw Error(Err::DuplicateServiceId, rec.service_id);
  }
  std::string id = rec.service_id;
  append_journal(encode_service_line(rec));
  services_.emplace(id, std::move(rec));
  return id;
}

std::vector<ServiceRecord> Registry::find_services(
    const DiscoveryQuery& q) const {
  q.validate();
  std::shared_lock lock(mu_);
  std::vector<ServiceRecord> out;
  for (const auto& [id, rec] : services_) {
    if (matches(rec, q)) out.push_back(rec);
  }
  return out;  // map order = service_id ascending
}

std::string Registry::publish_advertisement(ModuleAdvertisement adv,
                                            int64_t now_ms) {
  adv.keywords = lowercase_set(adv.keywords);
  adv.validate();
  if (adv.expires_at <= now_ms) {
    throw Error(Err::InvalidRecord,
                adv.module_id + ": expires_at not after publish time");
  }
  std::unique_lock lock(mu_);
  std::string id = adv.module_id;
  append_journal(encode_advertisement_line(adv));
  ads_[id] = std::move(adv);
  return id;
}

std::vector<ModuleAdvertisement> Registry::discover_modules(
    const DiscoveryQuery& q, int64_t now_ms) const {
  q.validate();
  std::shared_lock lock(mu_);
  std::vector<ModuleAdvertisement> out;
  for (const auto& [id, adv] : ads_) {
    if (matches(adv, q, now_ms)) out.push_back(adv);
  }
  return out;  // map order = module_id ascending
}

size_t Registry::expire_sweep(int64_t now_ms) {
  std::unique_lock lock(mu_);
  size_t removed = 0;
  for (auto it = ads_.begin(); it != ads_.end();) {
    if (it->second.expires_at < now_ms) {
      it = ads_.erase(it);
      ++removed;
    } else {
      ++it;
    }
  }
  return removed;
}

std::optional<ServiceRecord> Registry::service(const std::string& id) const {
  std::shared_lock lock(mu_);
  auto it = services_.find(id);
  if (it == services_.end()) return std::nullopt;
  return it->second;
}

std::optional<ModuleAdvertisement> Registry::advertisement(
    const std::string& id) const {
  std::shared_lock lock(mu_);
  auto it = ads_.find(id);
  if (it == ads_.end()) return std::nullopt;
  return it->second;
}

std::vector<ServiceRecord> Registry::all_services() const {
  std::shared_lock lock(mu_);
  std::vector<ServiceRecord> out;
  out.reserve(services_.size());
  for (const auto& [id, rec] : services_) out.push_back(rec);
  return out;
}

size_t Registry::service_count() const {
  std::shared_lock lock(mu_);
  return services_.size();
}

size_t Registry::advertisement_count() const {
  std::shared_lock lock(mu_);
  return ads_.size();
}

void Registry::append_journal(const std::string& line) {
  if (journal_path_.empty()) return;
  std::ofstream out(journal_path_, std::ios::app | std::ios::binary);
  if (!out) throw Error(Err::IoError, "cannot append to " + journal_path_);
  out << line << '\n';
  if (!out) throw Error(Err::IoError, "short write to " + journal_path_);
}

void Registry::load_journal() {
  std::error_code ec;
  if (journal_path_.empty() ||
      !std::filesystem::exists(journal_path_, ec)) {
    return;
  }
  std::string content = read_file(journal_path_);
  size_t lineno = 0;
  for (const auto& line : split(content, '\n')) {
    ++lineno;
    if (line.empty()) continue;
    try {
      if (line.rfind("SVC\t", 0) == 0) {
        ServiceRecord rec = decode_service_line(line);
        services_[rec.service_id] = std::move(rec);
      } else if (line.rfind("ADV\t", 0) == 0) {
        ModuleAdvertisement adv = decode_advertisement_line(line);
        ads_[adv.module_id] = std::move(adv);
      } else {
        throw Error(Err::InvalidRecord, "unknown record tag");
      }
    } catch (const Error& e) {
      throw Error(Err::InvalidRecord, journal_path_ + ":" +
                                          std::to_string(lineno) + ": " +
                                          e.what());
    }
  }
}

std::string encode_service_line(const ServiceRecord& rec) {
  std::vector<std::string> fields;
  fields.push_back("SVC");
  fields.push_back(percent_encode(rec.service_id));
  fields.push_back(percent_encode(rec.name));
  fields.push_back(percent_encode(rec.description));
  fields.push_back(encode_keywords(rec.keywords));
  if (const auto* url = std::get_if<PublicUrl>(&rec.binding)) {
    fields.push_back("url");
    fields.push_back(percent_encode(url->address));
    fields.push_back(percent_encode(url->path));
  } else {
    const auto& ob = std::get<OverlayBinding>(rec.binding);
    fields.push_back("pipe");
    fields.push_back(percent_encode(ob.peer_id));
    fields.push_back(percent_encode(ob.pipe_id));
  }
  fields.push_back(percent_encode(rec.owner_identity));
  return join(fields, '\t');
}

ServiceRecord decode_service_line(const std::string& line) {
  auto fields = split(line, '\t');
  if (fields.size() != 9 || fields[0] != "SVC") {
    throw Error(Err::InvalidRecord, "malformed service line");
  }
  ServiceRecord rec;
  rec.service_id = percent_decode(fields[1]);
  rec.name = percent_decode(fields[2]);
  rec.description = percent_decode(fields[3]);
  rec.keywords = decode_keywords(fields[4]);
  if (fields[5] == "url") {
    rec.binding = PublicUrl{percent_decode(fields[6]), percent_decode(fields[7])};
  } else if (fields[5] == "pipe") {
    rec.binding =
        OverlayBinding{percent_decode(fields[6]), percent_decode(fields[7])};
  } else {
    throw Error(Err::InvalidRecord, "unknown binding kind: " + fields[5]);
  }
  rec.owner_identity = percent_decode(fields[8]);
  rec.validate();
  return rec;
}

std::string encode_advertisement_line(const ModuleAdvertisement& adv) {
  std::vector<std::string> fields;
  fields.push_back("ADV");
  fields.push_back(percent_encode(adv.module_id));
  fields.push_back(percent_encode(adv.service_name));
  fields.push_back(percent_encode(adv.pipe_id));
  fields.push_back(percent_encode(adv.provider_peer));
  fields.push_back(encode_keywords(adv.keywords));
  fields.push_back(encode_attrs(adv.context_attrs));
  fields.push_back(std::to_string(adv.expires_at));
  return join(fields, '\t');
}

ModuleAdvertisement decode_advertisement_line(const std::string& line) {
  auto fields = split(line, '\t');
  if (fields.size() != 8 || fields[0] != "ADV") {
    throw Error(Err::InvalidRecord, "malformed advertisement line");
  }
  ModuleAdvertisement adv;
  adv.module_id = percent_decode(fields[1]);
  adv.service_name = percent_decode(fields[2]);
  adv.pipe_id = percent_decode(fields[3]);
  adv.provider_peer = percent_decode(fields[4]);
  adv.keywords = decode_keywords(fields[5]);
  adv.context_attrs = decode_attrs(fields[6]);
  adv.expires_at = decode_ms(fields[7]);
  adv.validate();
  return adv;
}

}  // namespace mwsmf
