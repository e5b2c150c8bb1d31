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

#ifndef MWSMF_MOBILE_HOST_HPP
#define MWSMF_MOBILE_HOST_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mwsmf/overlay.hpp"
#include "mwsmf/registry.hpp"
#include "mwsmf/rng.hpp"
#include "mwsmf/soap.hpp"
#include "mwsmf/wssec.hpp"

namespace mwsmf {

// Device budget: ~130 KB for the whole stack, of which the service
// runtime core takes 80 KB by default.
inline constexpr size_t kDefaultHostBudgetBytes = 133120;
inline constexpr size_t kDefaultCoreFootprintBytes = 81920;
inline constexpr size_t kPhotoServiceFootprintBytes = 40960;
inline constexpr int64_t kDefaultBootDelayMs = 2000;

inline constexpr std::string_view kWakeMagic = "MWSMF-WAKE/1.0";

enum class HostState { Active, Sleeping };

const char* host_state_name(HostState s);

/// Device handler cost: llround(base_ms + per_byte_ms * bytes), where
/// bytes counts the plaintext request plus response envelopes.
struct ProcessingCost {
  double base_ms = 0;
  double per_byte_ms = 0;

  int64_t cost_ms(size_t bytes) const;
};

/// Raised by service handlers to answer with a SOAP fault.
struct ServiceFault {
  std::string code;
  std::string reason;
};

using ServiceHandler = std::function<XmlElement(const XmlElement& request)>;

struct DeployedService {
  std::string path;
  ServiceHandler handler;
  ModuleAdvertisement advertisement;  // expires_at filled at publish time
  size_t footprint_bytes = 0;
};

/// SMS payload that turns a sleeping host on. Serialized as one
/// tab-separated line, small enough for a single SMS.
struct WakeupMessage {
  std::string magic = std::string(kWakeMagic);
  std::string target_host;
  std::string correlation_id;
  std::string requested_service;
  std::string callback;  // mediator peer id to acknowledge to

  std::string serialize() const;
  /// std::nullopt on wrong magic or field count.
  static std::optional<WakeupMessage> parse(std::string_view raw);
};

inline constexpr std::string_view kWakeAckPath = "/wake-ack";

struct HostConfig {
  size_t budget_bytes = kDefaultHostBudgetBytes;
  size_t core_bytes = kDefaultCoreFootprintBytes;
  int64_t boot_delay_ms = kDefaultBootDelayMs;
  int64_t ad_ttl_ms = kDefaultAdvertisementTtlMs;
  int64_t timestamp_skew_ms = kDefaultTimestampSkewMs;
  int64_t timestamp_lifetime_ms = kDefaultTimestampLifetimeMs;
  ProcessingCost cost;
};

/// In-memory photo collection, optionally loaded from a directory holding
/// `<id>.bin` (raw bytes) and `<id>.meta` (lat, lon, timestamp lines).
class PhotoStore {
 public:
  struct Entry {
    Bytes data;
    std::string lat;
    std::string lon;
    int64_t timestamp = 0;
  };

  PhotoStore() = default;
  static PhotoStore load(const std::string& dir);

  void add(std::string id, Entry entry);
  const Entry* find(const std::string& id) const;
  std::vector<std::string> ids() const;  // ascending
  size_t size() const { return photos_.size(); }

 private:
  std::map<std::string, Entry> photos_;
};

/// GetPhoto(id) -> photo bytes (base64) plus location + timestamp;
/// ListPhotos() -> ids with timestamps. Unknown id -> "photo-not-found".
XmlElement photo_album_handler(const XmlElement& request,
                               const PhotoStore& store);

DeployedService make_photo_album_service(
    std::string path, std::shared_ptr<PhotoStore> store,
    ModuleAdvertisement advertisement,
    size_t footprint_bytes = kPhotoServiceFootprintBytes);

/// Lightweight service provider on an EDGE peer: framed SOAP handling
/// with the MOBILE security profile, declarative footprint accounting,
/// one-request-at-a-time processing, and an SMS-driven sleep/wake
/// lifecycle (sleeping = radio off = departed from the overlay).
class MobileHost {
 public:
  MobileHost(Network& net, Registry& registry, Peer peer,
             std::string super_id, KeyMaterial keys, KeyMaterial gateway,
             HostConfig config, Rng rng);

  const std::string& id() const { return peer_.id; }
  HostState state() const { return state_; }
  const KeyMaterial& keys() const { return keys_; }
  const HostConfig& config() const { return config_; }

  /// Throws PathConflict / FootprintExceeded.
  void deploy_service(DeployedService svc);
  void undeploy_service(const std::string& path);
  bool has_service(const std::string& path) const;
  size_t footprint_bytes() const;  // core + deployed services

  /// Joins the overlay and publishes service advertisements.
  void power_on(int64_t now_ms);
  /// Radio off: leaves the overlay; only SMS gets through.
  void sleep(int64_t now_ms);

  /// Opens the secured request, dispatches to the deployed service, and
  /// returns the secured response plus the modeled device time. Throws
  /// Error(HostSleeping) when not ACTIVE; service/security problems come
  /// back as secured SOAP fault responses.
  std::pair<SoapEnvelope, int64_t> handle_request(const std::string& path,
                                                  const SoapEnvelope& env,
                                                  int64_t now_ms);

  /// Frame-level wrapper: ASLEEP status when sleeping, FAULT status for
  /// fault envelopes. processing_ms_out may be null; it reports the total
  /// device time (queue_wait_ms plus the modeled handler cost), which is
  /// also what the response's ProcessingMs header carries.
  ResponseFrame handle_frame(const RequestFrame& frame, int64_t now_ms,
                             int64_t* processing_ms_out,
                             int64_t queue_wait_ms = 0);

  /// Idempotent wake: the first valid wake while SLEEPING schedules one
  /// boot (ACTIVE after boot_delay_ms, re-join, re-publish, ack);
  /// further wakes only add their correlation to the pending acks. An
  /// ACTIVE host acks immediately. Returns the acknowledged correlation
  /// id, or std::nullopt for wrong magic/target.
  std::optional<std::string> receive_sms(const WakeupMessage& msg,
                                         int64_t now_ms);

  uint64_t boot_count() const { return boot_count_; }

 private:
  struct PlainReply {
    SoapEnvelope response;
    int64_t processing_ms = 0;
  };

  void on_pipe_message(const Message& msg);
  void on_sms(const Message& msg);
  void finish_boot(int64_t now_ms);
  void publish_advertisements(int64_t now_ms);
  void send_wake_ack(const std::string& correlation_id,
                     const std::string& callback, int64_t now_ms);
  SoapEnvelope secure_reply(const SoapEnvelope& plain, int64_t now_ms);
  PlainReply build_reply(const std::string& path, const SoapEnvelope& env,
                         int64_t now_ms, int64_t queue_wait_ms);

  Network& net_;
  Registry& registry_;
  Peer peer_;
  std::string super_id_;
  KeyMaterial keys_;
  KeyMaterial gateway_;
  HostConfig config_;
  Rng rng_;
  HostState state_ = HostState::Sleeping;
  std::map<std::string, DeployedService> services_;
  bool boot_pending_ = false;
  std::vector<std::pair<std::string, std::string>> pending_wake_acks_;
  int64_t busy_until_ = 0;
  uint64_t boot_count_ = 0;
};

}  // namespace mwsmf

#endif  // MWSMF_MOBILE_HOST_HPP
