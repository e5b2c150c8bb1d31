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

#ifndef MWSMF_HARNESS_HPP
#define MWSMF_HARNESS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mwsmf/mediation.hpp"
#include "mwsmf/mobile_host.hpp"
#include "mwsmf/overlay.hpp"
#include "mwsmf/registry.hpp"

namespace mwsmf {

inline constexpr int kExitOk = 0;
inline constexpr int kExitScenarioError = 1;
inline constexpr int kExitInvocationFailures = 2;
inline constexpr int kExitInternalError = 3;

struct ScenarioOptions {
  int64_t boot_delay_ms = kDefaultBootDelayMs;
  int64_t ad_ttl_ms = kDefaultAdvertisementTtlMs;
  int64_t skew_ms = kDefaultTimestampSkewMs;
  int64_t lifetime_ms = kDefaultTimestampLifetimeMs;
  int64_t auth_stage_ms = 2;
  int64_t transform_stage_ms = 5;
  int64_t route_stage_ms = 1;
  int64_t response_timeout_ms = kDefaultResponseTimeoutMs;
  double host_base_ms = 50.0;
  double host_per_byte_ms = 0.01;
  size_t budget_bytes = kDefaultHostBudgetBytes;
  size_t core_bytes = kDefaultCoreFootprintBytes;
  std::string mediator_id;  // defaults to the sole SUPER peer
  std::string photos_dir = "photos";
};

struct ClientDecl {
  std::string id;
  std::string credential;
  NetworkInterface link;
};

struct PublicDecl {
  std::string address;
  std::string peer_id;
  NetworkInterface link;
};

struct HostDecl {
  std::string id;
  std::string super_id;
  bool sleeping = false;
  bool wakeable = false;
};

struct ServiceDecl {
  ServiceRecord record;
  std::string path;  // host-side dispatch path
  size_t footprint_bytes = kPhotoServiceFootprintBytes;
};

/// One workload entry: `operation` is GetPhoto:<id>, ListPhotos, or
/// Xml:<literal body element>; `pad_bytes` appends a Pad element of that
/// many bytes; `expect` is "ok" or "fault:<code>"; `service` names the
/// destination the router is expected to pick ("-" when a fault is
/// expected before routing).
struct WorkItem {
  int64_t at_ms = 0;
  std::string client;
  std::string service;
  std::string operation;
  size_t pad_bytes = 0;
  std::string expect;
};

/// Declarative run description: sectioned plain text, tab-separated
/// fields, `#` comments. Sections: [options] (key value), [keystore]
/// (dir <path>), [topology] (peer/client/public lines), [hosts],
/// [services], [rules] (rule lines or file references), [profiles]
/// (profile lines or file references), [workload] (inv lines).
struct Scenario {
  std::string dir;  // directory of the scenario file; base for paths
  ScenarioOptions options;
  std::string keystore_dir;
  std::vector<Peer> peers;
  std::vector<ClientDecl> clients;
  std::vector<PublicDecl> publics;
  std::vector<HostDecl> hosts;
  std::vector<ServiceDecl> services;
  std::vector<RoutingRule> rules;
  std::vector<ClientProfile> profiles;
  std::vector<WorkItem> workload;

  /// Parses the file; throws Error(ScenarioInvalid) with file:line
  /// diagnostics. Call validate() for cross-reference checks.
  static Scenario load(const std::string& path);

  /// All referenced identities, keys, peers, and services resolve;
  /// workload times non-decreasing. Throws Error(ScenarioInvalid).
  void validate() const;

  std::string resolve(const std::string& relative) const;
};

/// Per-invocation decomposition in simulated milliseconds. The identity
/// total = processing + transmission + mediation holds exactly; the
/// fraction is processing/total.
struct InvocationMetric {
  std::string message_id;
  int64_t total_ms = 0;
  int64_t processing_ms = 0;
  int64_t transmission_ms = 0;
  int64_t mediation_ms = 0;
  double processing_fraction = 0.0;
  std::string status;
  std::string destination;
  bool woke_host = false;
  size_t request_bytes = 0;
  size_t response_bytes = 0;
  std::map<std::string, int64_t> stages;

  std::string to_line() const;
  static InvocationMetric from_line(std::string_view line,
                                    const std::string& where);
};

std::vector<InvocationMetric> load_metrics_file(const std::string& path);

struct InvocationOutcome {
  size_t index = 0;  // workload position
  WorkItem item;
  std::string message_id;
  std::string status;    // "ok", fault code, or "no-response"
  std::string expected;  // normalized expect field
  std::string body_canonical;  // canonical response body when status=="ok"
  bool matched = false;
};

/// Aggregates over a metric log; throws Error(NoData) on an empty one.
struct Aggregate {
  size_t count = 0;
  size_t ok_count = 0;
  double mean_fraction = 0.0;
  double min_fraction = 0.0;
  double max_fraction = 0.0;
  double mean_total_ms = 0.0;
  double mean_processing_ms = 0.0;
  double mean_transmission_ms = 0.0;
  double mean_mediation_ms = 0.0;
  std::map<std::string, double> stage_mean_ms;
};

Aggregate measure_invocation(const std::vector<InvocationMetric>& metrics);
std::string format_report(const Aggregate& agg);

struct RunResult {
  std::vector<InvocationMetric> metrics;
  std::vector<InvocationOutcome> outcomes;
  std::vector<MediationReport> reports;
  std::string metrics_text;
  std::string report_text;
  std::string trace_text;
  uint64_t messages_sent = 0;
  uint64_t messages_delivered = 0;
  uint64_t messages_failed = 0;
  int exit_code = kExitOk;
};

/// Loads, validates, assembles, and drives the scenario to completion.
/// Deterministic: the same (scenario, seed) yields byte-identical
/// metrics_text, report_text, and trace_text. Throws
/// Error(ScenarioInvalid) for bad scenarios and assembly failures.
RunResult run_scenario(const std::string& path, uint64_t seed,
                       bool capture_trace);

}  // namespace mwsmf

#endif  // MWSMF_HARNESS_HPP
