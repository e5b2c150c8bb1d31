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

#include "mwsmf/mobile_host.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <utility>

#include "mwsmf/errors.hpp"

namespace mwsmf {

namespace fs = std::filesystem;

const char* host_state_name(HostState s) {
  return s == HostState::Active ? "ACTIVE" : "SLEEPING";
}

int64_t ProcessingCost::cost_ms(size_t bytes) const {
  return std::llround(base_ms + per_byte_ms * static_cast<double>(bytes));
}

std::string WakeupMessage::serialize() const {
  return magic + "\t" + target_host + "\t" + correlation_id + "\t" +
         requested_service + "\t" + callback;
}

std::optional<WakeupMessage> WakeupMessage::parse(std::string_view raw) {
  auto fields = split(raw, '\t');
  if (fields.size() != 5 || fields[0] != kWakeMagic) return std::nullopt;
  WakeupMessage msg;
  msg.magic = fields[0];
  msg.target_host = fields[1];
  msg.correlation_id = fields[2];
  msg.requested_service = fields[3];
  msg.callback = fields[4];
  return msg;
}

PhotoStore PhotoStore::load(const std::string& dir) {
  PhotoStore store;
  std::vector<fs::path> bins;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".bin") bins.push_back(entry.path());
  }
  std::sort(bins.begin(), bins.end());
  for (const auto& bin : bins) {
    std::string id = bin.stem().string();
    fs::path meta = bin.parent_path() / (id + ".meta");
    std::string meta_text = read_file(meta.string());
    auto lines = split(meta_text, '\n');
    if (lines.size() < 3) {
      throw Error(Err::IoError, meta.string() + ": need lat, lon, timestamp lines");
    }
    Entry e;
    e.data = read_file_bytes(bin.string());
    e.lat = lines[0];
    e.lon = lines[1];
    e.timestamp = std::strtoll(lines[2].c_str(), nullptr, 10);
    store.add(id, std::move(e));
  }
  return store;
}

void PhotoStore::add(std::string id, Entry entry) {
  photos_[std::move(id)] = std::move(entry);
}

const PhotoStore::Entry* PhotoStore::find(const std::string& id) const {
  auto it = photos_.find(id);
  return it == photos_.end() ? nullptr : &it->second;
}

std::vector<std::string> PhotoStore::ids() const {
  std::vector<std::string> out;
  out.reserve(photos_.size());
  for (const auto& [id, e] : photos_) out.push_back(id);
  return out;
}

XmlElement photo_album_handler(const XmlElement& request,
                               const PhotoStore& store) {
  const QName id_attr{"", "id"};
  if (request.name.local == "ListPhotos") {
    XmlElement out{{"", "Photos"}};
    for (const auto& id : store.ids()) {
      XmlElement photo{{"", "Photo"}};
      photo.attr(id_attr, id);
      photo.attr({"", "timestamp"}, std::to_string(store.find(id)->timestamp));
      out.child(std::move(photo));
    }
    return out;
  }
  if (request.name.local == "GetPhoto") {
    const XmlElement* id_elem = request.find("id");
    if (!id_elem) throw ServiceFault{"bad-request", "GetPhoto needs an id"};
    std::string id = id_elem->text_content();
    const PhotoStore::Entry* entry = store.find(id);
    if (!entry) throw ServiceFault{"photo-not-found", id};
    XmlElement out{{"", "Photo"}};
    out.attr(id_attr, id);
    out.child(XmlElement({"", "Data"}, base64_encode(entry->data)));
    XmlElement loc{{"", "Location"}};
    loc.child(XmlElement({"", "Lat"}, entry->lat));
    loc.child(XmlElement({"", "Lon"}, entry->lon));
    out.child(std::move(loc));
    out.child(XmlElement({"", "Timestamp"}, std::to_string(entry->timestamp)));
    return out;
  }
  throw ServiceFault{"unsupported-operation", request.name.local};
}

DeployedService make_photo_album_service(std::string path,
                                         std::shared_ptr<PhotoStore> store,
                                         ModuleAdvertisement advertisement,
                                         size_t footprint_bytes) {
  DeployedService svc;
  svc.path = std::move(path);
  svc.handler = [store = std::move(store)](const XmlElement& req) {
    return photo_album_handler(req, *store);
  };
  svc.advertisement = std::move(advertisement);
  svc.footprint_bytes = footprint_bytes;
  return svc;
}

MobileHost::MobileHost(Network& net, Registry& registry, Peer peer,
                       std::string super_id, KeyMaterial keys,
                       KeyMaterial gateway, HostConfig config, Rng rng)
    : net_(net),
      registry_(registry),
      peer_(std::move(peer)),
      super_id_(std::move(super_id)),
      keys_(std::move(keys)),
      gateway_(std::move(gateway)),
      config_(std::move(config)),
      rng_(std::move(rng)) {
  keys_.validate();
  if (peer_.role != PeerRole::Edge) {
    throw Error(Err::InvalidRecord, peer_.id + ": hosts run on edge peers");
  }
  if (!net_.has_peer(peer_.id)) net_.add_peer(peer_);
  net_.set_handler(peer_.id,
                   [this](Network&, const Message& m) { on_pipe_message(m); });
  net_.set_sms_handler(peer_.id,
                       [this](Network&, const Message& m) { on_sms(m); });
}

void MobileHost::deploy_service(DeployedService svc) {
  if (services_.count(svc.path)) {
    throw Error(Err::PathConflict, svc.path);
  }
  size_t used = footprint_bytes();
  if (used + svc.footprint_bytes > config_.budget_bytes) {
    throw Error(Err::FootprintExceeded,
                peer_.id + ": " + std::to_string(used + svc.footprint_bytes) +
                    " > " + std::to_string(config_.budget_bytes) + " bytes");
  }
  services_.emplace(svc.path, std::move(svc));
}

void MobileHost::undeploy_service(const std::string& path) {
  services_.erase(path);
}

bool MobileHost::has_service(const std::string& path) const {
  return services_.count(path) > 0;
}

size_t MobileHost::footprint_bytes() const {
  size_t total = config_.core_bytes;
  for (const auto& [path, svc] : services_) total += svc.footprint_bytes;
  return total;
}

void MobileHost::power_on(int64_t now_ms) {
  state_ = HostState::Active;
  busy_until_ = std::max(busy_until_, now_ms);
  net_.join(peer_, super_id_, now_ms);
  publish_advertisements(now_ms);
}

void MobileHost::sleep(int64_t now_ms) {
  state_ = HostState::Sleeping;
  if (net_.reachable(peer_.id)) net_.leave(peer_.id, now_ms);
}

SoapEnvelope MobileHost::secure_reply(const SoapEnvelope& plain,
                                      int64_t now_ms) {
  return secure_outbound(plain, keys_, gateway_, SecurityProfile::mobile(),
                         now_ms, config_.timestamp_lifetime_ms, rng_);
}

MobileHost::PlainReply MobileHost::build_reply(const std::string& path,
                                               const SoapEnvelope& env,
                                               int64_t now_ms,
                                               int64_t queue_wait_ms) {
  std::optional<SoapEnvelope> opened;
  std::string code;
  std::string reason;
  try {
    OpenResult r = open_inbound(env, keys_, gateway_.rsa, now_ms,
                                config_.timestamp_skew_ms);
    if (!r.verified) {
      code = "security-fault";
      reason = "signature verification failed";
    } else if (!r.fresh) {
      code = "security-fault";
      reason = "timestamp missing or stale";
    } else {
      opened = std::move(r.env);
    }
  } catch (const Error&) {
    code = "security-fault";
    reason = "message rejected";
  }

  XmlElement response_body;
  if (opened) {
    auto it = services_.find(path);
    if (it == services_.end()) {
      code = "service-not-found";
      reason = path;
    } else {
      try {
        response_body = it->second.handler(opened->body);
      } catch (const ServiceFault& f) {
        code = f.code;
        reason = f.reason;
      } catch (const std::exception& e) {
        code = "internal";
        reason = e.what();
      }
    }
  }

  PlainReply out;
  out.response = code.empty() ? SoapEnvelope(std::move(response_body))
                              : make_fault(code, reason);
  out.response.set_message_id(opened ? opened->message_id()
                                     : env.message_id());

  // Device time for the invocation: any time spent queued behind an
  // earlier request, plus the modeled handler cost over the plaintext
  // request and response sizes (the ProcessingMs header itself excluded).
  size_t request_bytes = serialize_envelope(opened ? *opened : env).size();
  size_t response_bytes = serialize_envelope(out.response).size();
  out.processing_ms =
      queue_wait_ms + config_.cost.cost_ms(request_bytes + response_bytes);
  out.response.put_header(
      XmlElement({"", "ProcessingMs"}, std::to_string(out.processing_ms)));
  return out;
}

std::pair<SoapEnvelope, int64_t> MobileHost::handle_request(
    const std::string& path, const SoapEnvelope& env, int64_t now_ms) {
  if (state_ != HostState::Active) {
    throw Error(Err::HostSleeping, peer_.id);
  }
  PlainReply r = build_reply(path, env, now_ms, 0);
  return {secure_reply(r.response, now_ms), r.processing_ms};
}

ResponseFrame MobileHost::handle_frame(const RequestFrame& frame,
                                       int64_t now_ms,
                                       int64_t* processing_ms_out,
                                       int64_t queue_wait_ms) {
  if (processing_ms_out) *processing_ms_out = 0;
  if (state_ != HostState::Active) {
    return ResponseFrame{FrameStatus::Asleep, ""};
  }

  bool fault;
  SoapEnvelope secured;
  int64_t processing_ms = 0;
  try {
    SoapEnvelope request = parse_envelope(frame.soap);
    PlainReply r = build_reply(frame.path, request, now_ms, queue_wait_ms);
    fault = is_fault(r.response);
    processing_ms = r.processing_ms;
    secured = secure_reply(r.response, now_ms);
  } catch (const Error&) {
    SoapEnvelope fault_env = make_fault("malformed", "unparseable request");
    size_t response_bytes = serialize_envelope(fault_env).size();
    processing_ms = queue_wait_ms +
                    config_.cost.cost_ms(frame.soap.size() + response_bytes);
    fault_env.put_header(
        XmlElement({"", "ProcessingMs"}, std::to_string(processing_ms)));
    secured = secure_reply(fault_env, now_ms);
    fault = true;
  }
  if (processing_ms_out) *processing_ms_out = processing_ms;
  return ResponseFrame{fault ? FrameStatus::Fault : FrameStatus::Ok,
                       serialize_envelope(secured)};
}

std::optional<std::string> MobileHost::receive_sms(const WakeupMessage& msg,
                                                   int64_t now_ms) {
  if (msg.magic != kWakeMagic) {
    net_.emit_trace(now_ms, "sms-ignored", peer_.id + "\tbad-magic");
    return std::nullopt;
  }
  if (msg.target_host != peer_.id) {
    net_.emit_trace(now_ms, "sms-ignored", peer_.id + "\twrong-target");
    return std::nullopt;
  }
  if (state_ == HostState::Active) {
    send_wake_ack(msg.correlation_id, msg.callback, now_ms);
    return msg.correlation_id;
  }
  pending_wake_acks_.emplace_back(msg.correlation_id, msg.callback);
  if (!boot_pending_) {
    boot_pending_ = true;
    net_.schedule(now_ms + config_.boot_delay_ms,
                  [this](Network& n) { finish_boot(n.now()); });
  }
  return msg.correlation_id;
}

void MobileHost::finish_boot(int64_t now_ms) {
  boot_pending_ = false;
  if (state_ == HostState::Active) return;
  state_ = HostState::Active;
  ++boot_count_;
  busy_until_ = std::max(busy_until_, now_ms);
  net_.emit_trace(now_ms, "boot", peer_.id);
  net_.join(peer_, super_id_, now_ms);
  publish_advertisements(now_ms);
  std::vector<std::pair<std::string, std::string>> acks;
  acks.swap(pending_wake_acks_);
  for (const auto& [correlation_id, callback] : acks) {
    send_wake_ack(correlation_id, callback, now_ms);
  }
}

void MobileHost::publish_advertisements(int64_t now_ms) {
  for (const auto& [path, svc] : services_) {
    ModuleAdvertisement adv = svc.advertisement;
    adv.provider_peer = peer_.id;
    adv.expires_at = now_ms + config_.ad_ttl_ms;
    registry_.publish_advertisement(std::move(adv), now_ms);
  }
}

void MobileHost::send_wake_ack(const std::string& correlation_id,
                               const std::string& callback, int64_t now_ms) {
  XmlElement body{{"", "WakeAck"}};
  body.child(XmlElement({"", "CorrelationId"}, correlation_id));
  body.child(XmlElement({"", "Host"}, peer_.id));
  SoapEnvelope env{std::move(body)};
  RequestFrame frame{std::string(kWakeAckPath), serialize_envelope(env)};
  std::string pipe_id = "wakeack." + peer_.id;
  net_.open_pipe(peer_.id, pipe_id, callback);
  net_.send(pipe_id, frame.to_bytes(), now_ms);
}

void MobileHost::on_pipe_message(const Message& msg) {
  if (state_ != HostState::Active) return;  // a sleeping host emits nothing
  int64_t arrival = msg.deliver_at;
  RequestFrame frame;
  try {
    frame = RequestFrame::parse(msg.payload);
  } catch (const Error&) {
    net_.emit_trace(arrival, "host-drop", peer_.id + "\tbad-frame");
    return;
  }

  // Pipe-delivered frames are addressed by pipe, not path: resolve the
  // deployed service whose advertisement owns this pipe.
  if (msg.link == LinkKind::Pipe) {
    for (const auto& [path, svc] : services_) {
      if (svc.advertisement.pipe_id == msg.link_id) {
        frame.path = path;
        break;
      }
    }
  }

  // One request at a time: later arrivals wait for the device to free up,
  // and the wait is part of the reported device time.
  int64_t wait = std::max<int64_t>(0, busy_until_ - arrival);
  int64_t device_ms = 0;
  ResponseFrame response = handle_frame(frame, arrival, &device_ms, wait);
  int64_t finish = arrival + device_ms;
  busy_until_ = finish;

  std::string bytes = response.to_bytes();
  LinkKind link = msg.link;
  std::string link_id = msg.link_id;
  std::string reply_to = msg.from;
  net_.schedule(finish, [this, bytes = std::move(bytes), link, link_id,
                         reply_to](Network& n) {
    if (state_ != HostState::Active) return;
    if (link == LinkKind::Direct) {
      n.send_direct(link_id, peer_.id, bytes, n.now());
    } else {
      std::string reply_pipe = link_id + ".r";
      n.open_pipe(peer_.id, reply_pipe, reply_to);
      n.send(reply_pipe, bytes, n.now());
    }
  });
}

void MobileHost::on_sms(const Message& msg) {
  auto wake = WakeupMessage::parse(msg.payload);
  if (!wake) {
    net_.emit_trace(msg.deliver_at, "sms-ignored", peer_.id + "\tbad-magic");
    return;
  }
  receive_sms(*wake, msg.deliver_at);
}

}  // namespace mwsmf
