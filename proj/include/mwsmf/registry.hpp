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

#ifndef MWSMF_REGISTRY_HPP
#define MWSMF_REGISTRY_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <variant>
#include <vector>

namespace mwsmf {

inline constexpr int64_t kDefaultAdvertisementTtlMs = 120000;

/// Internet-side binding: the service answers at a host address + path.
struct PublicUrl {
  std::string address;
  std::string path;

  bool operator==(const PublicUrl&) const = default;
};

/// Overlay-side binding: the service answers on a pipe at a peer.
struct OverlayBinding {
  std::string peer_id;
  std::string pipe_id;

  bool operator==(const OverlayBinding&) const = default;
};

using ServiceBinding = std::variant<PublicUrl, OverlayBinding>;

/// Internet-facing service entry (UDDI-style record).
struct ServiceRecord {
  std::string service_id;
  std::string name;
  std::string description;
  std::set<std::string> keywords;  // lowercase terms
  ServiceBinding binding;
  std::string owner_identity;

  /// Throws Error(InvalidRecord) on empty id or empty keywords.
  void validate() const;

  bool operator==(const ServiceRecord&) const = default;
};

/// Overlay-facing advertisement (JXTA-module style): discovery metadata
/// plus the binding data needed to reach the provider, in one record.
struct ModuleAdvertisement {
  std::string module_id;
  std::string service_name;
  std::string pipe_id;
  std::string provider_peer;
  std::set<std::string> keywords;
  std::map<std::string, std::string> context_attrs;
  int64_t expires_at = 0;

  void validate() const;

  bool operator==(const ModuleAdvertisement&) const = default;
};

/// Keyword clause: non-empty intersection (vacuous when the query has no
/// keywords). Context clause: every filter attribute present with the
/// exact value. Both clauses must hold.
struct DiscoveryQuery {
  std::set<std::string> keywords;
  std::map<std::string, std::string> context_filters;
  bool include_expired = false;

  /// Throws Error(InvalidRecord) when both keyword set and filters are
  /// empty.
  void validate() const;
};

bool matches(const ServiceRecord& rec, const DiscoveryQuery& q);
bool matches(const ModuleAdvertisement& adv, const DiscoveryQuery& q,
             int64_t now_ms);

/// Dual discovery store. Writers serialize; readers share a lock and see
/// consistent snapshots. With a journal path set, every publication is
/// appended to the journal and replayed on construction (later lines with
/// the same id supersede earlier ones).
class Registry {
 public:
  Registry() = default;
  explicit Registry(std::string journal_path);

  /// Throws Error(DuplicateServiceId) when the id is already present.
  std::string publish_service(ServiceRecord rec);
  std::vector<ServiceRecord> find_services(const DiscoveryQuery& q) const;

  /// Re-publication with the same module_id replaces the record.
  std::string publish_advertisement(ModuleAdvertisement adv, int64_t now_ms);
  std::vector<ModuleAdvertisement> discover_modules(const DiscoveryQuery& q,
                                                    int64_t now_ms) const;

  /// Removes advertisements with expires_at < now; returns the count.
  size_t expire_sweep(int64_t now_ms);

  std::optional<ServiceRecord> service(const std::string& id) const;
  std::optional<ModuleAdvertisement> advertisement(const std::string& id) const;
  std::vector<ServiceRecord> all_services() const;
  size_t service_count() const;
  size_t advertisement_count() const;

 private:
  void append_journal(const std::string& line);
  void load_journal();

  mutable std::shared_mutex mu_;
  std::map<std::string, ServiceRecord> services_;
  std::map<std::string, ModuleAdvertisement> ads_;
  std::string journal_path_;
};

// Journal line codecs, exposed for tests and tooling.
std::string encode_service_line(const ServiceRecord& rec);
std::string encode_advertisement_line(const ModuleAdvertisement& adv);
ServiceRecord decode_service_line(const std::string& line);
ModuleAdvertisement decode_advertisement_line(const std::string& line);

}  // namespace mwsmf

#endif  // MWSMF_REGISTRY_HPP
