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

#ifndef MWSMF_MEDIATION_HPP
#define MWSMF_MEDIATION_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mwsmf/mobile_host.hpp"
#include "mwsmf/overlay.hpp"
#include "mwsmf/registry.hpp"
#include "mwsmf/rng.hpp"
#include "mwsmf/soap.hpp"
#include "mwsmf/wssec.hpp"

namespace mwsmf {

inline constexpr int64_t kDefaultResponseTimeoutMs = 30000;
inline constexpr std::string_view kRelayedFromLocal = "RelayedFrom";

/// Content rule: slash-separated element-name path evaluated from the
/// body root (`GetPhoto/id`), optionally pinned to an exact text value.
struct RoutingRule {
  int priority = 0;  // lower evaluates earlier
  std::string rule_id;
  std::string match_path;
  std::optional<std::string> match_value;  // absent = existence test
  std::string destination;                 // service id in the registry
};

bool rule_matches(const RoutingRule& rule, const XmlElement& body);
/// First match over rules sorted by (priority, rule_id); nullptr when
/// nothing matches.
const RoutingRule* first_match(const std::vector<RoutingRule>& sorted_rules,
                               const XmlElement& body);
/// `priority<TAB>rule_id<TAB>match_path<TAB>match_value-or-*<TAB>dest`
/// per line, `#` comments.
std::vector<RoutingRule> load_rules_file(const std::string& path);

struct ClientProfile {
  std::string identity;
  std::string credential_digest;  // hex sha256, never the plaintext secret
  SecurityProfile capability = SecurityProfile::mobile();
  std::map<std::string, std::string> personalization;
  std::map<std::string, std::string> context;
  std::vector<std::string> allowed_services;  // empty = any
};

/// Digest stored/compared for endpoint credentials.
std::string credential_digest(std::string_view credential);
/// `identity<TAB>digest<TAB>capability<TAB>attr=val;...` per line;
/// `allow=` lists services, `ctx.` prefixes context attributes.
std::vector<ClientProfile> load_profiles_file(const std::string& path);

enum class AuthResult { Granted, Denied };

enum class TransformDirection { None, FullToMobile, MobileToFull };

const char* transform_direction_name(TransformDirection d);

/// Opens a message secured under the source profile, re-issues it under
/// the target party's side of `direction` with the mediator as signer,
/// and records the original sender + verification verdict in a
/// RelayedFrom header. The payload body bytes are preserved exactly.
/// Throws Error(SourceVerificationFailed) instead of forwarding anything
/// unverified.
SoapEnvelope transform_profile(const SoapEnvelope& env,
                               TransformDirection direction,
                               const KeyMaterial& mediator_keys,
                               const RsaKeyPair& source_public,
                               const KeyMaterial& target, int64_t now_ms,
                               int64_t lifetime_ms, int64_t skew_ms, Rng& rng);

/// One line per handled message; the event fields make the invocation
/// time decomposition exact (every simulated millisecond between client
/// send and client receive lands in exactly one bucket).
struct MediationReport {
  std::string message_id;
  std::string client_identity;
  bool authenticated = false;
  TransformDirection transformed = TransformDirection::None;
  std::string destination;
  std::string binding_kind;  // "overlay" | "public-url" | ""
  bool woke_host = false;
  std::string status;  // "ok" or a fault code
  std::map<std::string, int64_t> timings;  // stage -> ms

  int64_t received_at = 0;
  int64_t forwarded_at = 0;
  int64_t forward_deliver_at = 0;
  int64_t response_at = 0;
  int64_t replied_at = 0;
  int64_t reply_deliver_at = 0;
  int64_t device_ms = 0;     // host-reported device time
  size_t request_bytes = 0;  // host-view plaintext request size
  size_t response_bytes = 0; // host plaintext response size

  int64_t mediation_ms() const;  // sum of stage timings
  std::string to_line() const;
};

struct MediatorConfig {
  int64_t auth_stage_ms = 2;
  int64_t transform_stage_ms = 5;
  int64_t route_stage_ms = 1;
  int64_t response_timeout_ms = kDefaultResponseTimeoutMs;
  int64_t timestamp_skew_ms = kDefaultTimestampSkewMs;
  int64_t timestamp_lifetime_ms = kDefaultTimestampLifetimeMs;
  int64_t boot_delay_ms = kDefaultBootDelayMs;  // sizes the wake window
};

/// The intermediary: authenticates endpoints against stored profiles,
/// routes by content, re-issues security between the full-strength and
/// handset profiles (gateway trust), wakes sleeping hosts over SMS with
/// per-host dedup, and bridges Internet-side links to overlay pipes. Also
/// the overlay's super peer: it owns the routing table and answers
/// discovery queries.
class Mediator {
 public:
  Mediator(Network& net, Registry& registry, Keystore keystore, Peer peer,
           KeyMaterial keys, MediatorConfig config, Rng rng);

  const std::string& id() const { return peer_.id; }
  const KeyMaterial& keys() const { return keys_; }

  void add_rule(RoutingRule rule);
  void load_rules(const std::string& path);
  const std::vector<RoutingRule>& rules() const { return rules_; }
  void add_profile(ClientProfile profile);
  void load_profiles(const std::string& path);
  const ClientProfile* profile(const std::string& identity) const;

  /// Opens the Internet-side link a client talks over; returns its id.
  std::string connect_client(const std::string& client_peer,
                             NetworkInterface link);
  /// Maps a PublicUrl address to a host peer over a direct link.
  void register_public_address(const std::string& address,
                               const std::string& peer_id,
                               NetworkInterface link);
  /// Marks a host as SMS-wakeable (it must be for wake-up to trigger).
  void register_wakeable_host(const std::string& peer_id);

  /// Granted iff the identity is known and the credential digest
  /// matches; every failure mode takes the same code path and returns
  /// the same shape.
  AuthResult authenticate(const std::string& identity,
                          const std::string& credential) const;

  /// First-match content routing. Throws Error(NoRouteMatched).
  std::string route(const SoapEnvelope& env) const;

  /// Sends (or reuses) the wake SMS for a host; returns the pending
  /// correlation id. Throws Error(UnknownHost) for unregistered hosts.
  std::string trigger_wakeup(const std::string& host_peer,
                             const std::string& requested_service,
                             int64_t now_ms);

  /// Super-peer duty: edge peers resolve discovery through the mediator.
  std::vector<ModuleAdvertisement> discover(const DiscoveryQuery& q,
                                            int64_t now_ms) const;

  const std::vector<MediationReport>& reports() const { return reports_; }
  size_t pending_count() const { return pending_.size(); }

 private:
  struct Pending {
    std::string message_id;
    std::string client_identity;
    std::string client_link;
    std::string host_identity;
    std::string host_peer;
    std::string forward_payload;  // framed, secured request
    std::string forward_pipe;     // overlay binding
    std::string forward_link;     // public-url binding
    size_t report_idx = 0;
    int64_t queued_at = 0;  // wake-queue entry time, 0 when not queued
    uint64_t epoch = 0;
    bool resolved = false;
  };

  struct WakeState {
    std::string correlation_id;
    std::vector<std::string> queued_mids;
    int64_t triggered_at = 0;
  };

  struct PublicHost {
    std::string peer_id;
    std::string link_id;
  };

  void on_message(const Message& msg);
  void on_client_request(const Message& msg);
  void on_host_response(const Message& msg);
  void on_wake_ack(const Message& msg);
  void forward_attempt(const std::string& mid, int64_t now_ms);
  void dispatch_forward(Pending& p, MediationReport& r, int64_t now_ms);
  void flush_wake_queue(const std::string& host_peer, int64_t now_ms);
  void fail_pending(const std::string& mid, const std::string& code,
                    int64_t now_ms);
  void send_frame_reply(const std::string& link, SoapEnvelope plain, bool fault,
                        std::string secure_to, size_t report_idx, int64_t at_ms);
  KeyMaterial client_material(const std::string& identity) const;

  Network& net_;
  Registry& registry_;
  Keystore keystore_;
  Peer peer_;
  KeyMaterial keys_;
  MediatorConfig config_;
  Rng rng_;
  std::vector<RoutingRule> rules_;
  std::map<std::string, ClientProfile> profiles_;
  std::set<std::string> client_links_;
  std::set<std::string> host_links_;
  std::map<std::string, PublicHost> public_hosts_;  // by address
  std::set<std::string> wakeable_hosts_;
  std::map<std::string, Pending> pending_;  // by message id
  std::map<std::string, WakeState> wake_;   // by host peer
  std::vector<MediationReport> reports_;
  uint64_t next_epoch_ = 0;
};

}  // namespace mwsmf

#endif  // MWSMF_MEDIATION_HPP
