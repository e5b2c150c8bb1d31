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

#include "mwsmf/mediation.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <sstream>
#include <tuple>
#include <utility>

#include "mwsmf/crypto.hpp"
#include "mwsmf/errors.hpp"
#include "mwsmf/util.hpp"
#include "mwsmf/xml.hpp"

namespace mwsmf {
namespace {

constexpr int64_t kWakeWindowMarginMs = 1000;

int64_t to_int(std::string_view s, const std::string& where) {
  std::string tmp(s);
  errno = 0;
  char* end = nullptr;
  long long v = std::strtoll(tmp.c_str(), &end, 10);
  if (tmp.empty() || errno != 0 || end != tmp.c_str() + tmp.size()) {
    throw Error(Err::InvalidRecord, where + ": bad integer '" + tmp + "'");
  }
  return v;
}

std::string chop_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

void sort_rules(std::vector<RoutingRule>& rules) {
  std::stable_sort(rules.begin(), rules.end(),
                   [](const RoutingRule& a, const RoutingRule& b) {
                     return std::tie(a.priority, a.rule_id) <
                            std::tie(b.priority, b.rule_id);
                   });
}

XmlElement relayed_from(const std::string& identity, bool verified) {
  XmlElement relayed{QName{"", std::string(kRelayedFromLocal)}};
  relayed.child(XmlElement({"", "Identity"}, identity));
  relayed.child(XmlElement({"", "Verified"}, verified ? "true" : "false"));
  return relayed;
}

// Strip the incoming security envelope and re-issue under the mediator's
// signature for the target party. The payload body is carried over
// byte-for-byte; put_header discards any sender-supplied RelayedFrom so
// the provenance header is always mediator-asserted.
SoapEnvelope reissue(const SoapEnvelope& opened_plain,
                     const std::string& source_identity, bool source_verified,
                     const KeyMaterial& mediator_keys, const KeyMaterial& target,
                     const SecurityProfile& profile, int64_t now_ms,
                     int64_t lifetime_ms, Rng& rng) {
  SoapEnvelope plain = opened_plain;
  plain.set_message_id(opened_plain.message_id());
  plain.remove_header("Security");
  plain.put_header(relayed_from(source_identity, source_verified));
  return secure_outbound(plain, mediator_keys, target, profile, now_ms,
                         lifetime_ms, rng);
}

}  // namespace

bool rule_matches(const RoutingRule& rule, const XmlElement& body) {
  std::vector<std::string> parts = split(rule.match_path, '/');
  if (parts.empty() || body.name.local != parts[0]) return false;
  const XmlElement* cur = &body;
  for (size_t i = 1; i < parts.size(); ++i) {
    cur = cur->find(parts[i]);
    if (cur == nullptr) return false;
  }
  if (rule.match_value && cur->text_content() != *rule.match_value) {
    return false;
  }
  return true;
}

const RoutingRule* first_match(const std::vector<RoutingRule>& sorted_rules,
                               const XmlElement& body) {
  for (const RoutingRule& rule : sorted_rules) {
    if (rule_matches(rule, body)) return &rule;
  }
  return nullptr;
}

std::vector<RoutingRule> load_rules_file(const std::string& path) {
  std::string raw = read_file(path);
  std::vector<RoutingRule> rules;
  size_t line_no = 0;
  for (const std::string& entry : split(raw, '\n')) {
    ++line_no;
    std::string line = chop_cr(entry);
    if (line.empty() || line[0] == '#') continue;
    std::string where = path + ":" + std::to_string(line_no);
    std::vector<std::string> f = split(line, '\t');
    if (f.size() != 5) {
      throw Error(Err::InvalidRecord, where + ": want 5 tab-separated fields");
    }
    RoutingRule r;
    r.priority = static_cast<int>(to_int(f[0], where));
    r.rule_id = f[1];
    r.match_path = f[2];
    if (f[3] != "*") r.match_value = f[3];
    r.destination = f[4];
    if (r.rule_id.empty() || r.match_path.empty() || r.destination.empty()) {
      throw Error(Err::InvalidRecord, where + ": empty field");
    }
    rules.push_back(std::move(r));
  }
  sort_rules(rules);
  return rules;
}

std::string credential_digest(std::string_view credential) {
  return hex_encode(sha256(credential));
}

std::vector<ClientProfile> load_profiles_file(const std::string& path) {
  std::string raw = read_file(path);
  std::vector<ClientProfile> profiles;
  size_t line_no = 0;
  for (const std::string& entry : split(raw, '\n')) {
    ++line_no;
    std::string line = chop_cr(entry);
    if (line.empty() || line[0] == '#') continue;
    std::string where = path + ":" + std::to_string(line_no);
    std::vector<std::string> f = split(line, '\t');
    if (f.size() != 4) {
      throw Error(Err::InvalidRecord, where + ": want 4 tab-separated fields");
    }
    ClientProfile p;
    p.identity = f[0];
    p.credential_digest = f[1];
    if (p.identity.empty()) {
      throw Error(Err::InvalidRecord, where + ": empty identity");
    }
    if (p.credential_digest.size() != 64) {
      throw Error(Err::InvalidRecord, where + ": digest must be hex sha-256");
    }
    p.capability = SecurityProfile::by_name(f[2]);
    if (f[3] != "-" && !f[3].empty()) {
      for (const std::string& pair : split(f[3], ';')) {
        if (pair.empty()) continue;
        size_t eq = pair.find('=');
        if (eq == std::string::npos || eq == 0) {
          throw Error(Err::InvalidRecord, where + ": bad attribute '" + pair + "'");
        }
        std::string key = pair.substr(0, eq);
        std::string value = pair.substr(eq + 1);
        if (key == "allow") {
          for (const std::string& svc : split(value, ',')) {
            if (!svc.empty()) p.allowed_services.push_back(svc);
          }
        } else if (key.rfind("ctx.", 0) == 0) {
          p.context[key.substr(4)] = value;
        } else {
          p.personalization[key] = value;
        }
      }
    }
    profiles.push_back(std::move(p));
  }
  return profiles;
}

const char* transform_direction_name(TransformDirection d) {
  switch (d) {
    case TransformDirection::FullToMobile:
      return "full-to-mobile";
    case TransformDirection::MobileToFull:
      return "mobile-to-full";
    case TransformDirection::None:
      break;
  }
  return "none";
}

SoapEnvelope transform_profile(const SoapEnvelope& env,
                               TransformDirection direction,
                               const KeyMaterial& mediator_keys,
                               const RsaKeyPair& source_public,
                               const KeyMaterial& target, int64_t now_ms,
                               int64_t lifetime_ms, int64_t skew_ms, Rng& rng) {
  OpenResult opened = open_inbound(env, mediator_keys, source_public, now_ms,
                                   skew_ms);
  if (!opened.verified) {
    throw Error(Err::SourceVerificationFailed,
                "refusing to relay an unverified message");
  }
  SecurityHeader hdr = SecurityHeader::read(env);
  SecurityProfile profile = target.profile;
  switch (direction) {
    case TransformDirection::FullToMobile:
      profile = SecurityProfile::mobile();
      break;
    case TransformDirection::MobileToFull:
      profile = SecurityProfile::full();
      break;
    case TransformDirection::None:
      break;
  }
  return reissue(opened.env, hdr.token_ref, true, mediator_keys, target,
                 profile, now_ms, lifetime_ms, rng);
}

int64_t MediationReport::mediation_ms() const {
  int64_t total = 0;
  for (const auto& [stage, ms] : timings) total += ms;
  return total;
}

std::string MediationReport::to_line() const {
  auto field = [](const std::string& s) {
    return s.empty() ? std::string("-") : percent_encode(s);
  };
  std::string stages;
  for (const auto& [stage, ms] : timings) {
    if (!stages.empty()) stages += ';';
    stages += stage + "=" + std::to_string(ms);
  }
  if (stages.empty()) stages = "-";
  std::ostringstream os;
  os << field(message_id) << '\t' << field(client_identity) << '\t'
     << (authenticated ? 1 : 0) << '\t' << transform_direction_name(transformed)
     << '\t' << field(destination) << '\t' << field(binding_kind) << '\t'
     << (woke_host ? 1 : 0) << '\t' << field(status) << '\t' << stages << '\t'
     << received_at << '\t' << forwarded_at << '\t' << forward_deliver_at
     << '\t' << response_at << '\t' << replied_at << '\t' << reply_deliver_at
     << '\t' << device_ms << '\t' << request_bytes << '\t' << response_bytes;
  return os.str();
}

Mediator::Mediator(Network& net, Registry& registry, Keystore keystore,
                   Peer peer, KeyMaterial keys, MediatorConfig config, Rng rng)
    : net_(net),
      registry_(registry),
      keystore_(std::move(keystore)),
      peer_(std::move(peer)),
      keys_(std::move(keys)),
      config_(config),
      rng_(std::move(rng)) {
  keys_.validate();
  if (peer_.role != PeerRole::Super) {
    throw Error(Err::InvalidRecord, "the mediator must run on a super peer");
  }
  if (!net_.has_peer(peer_.id)) net_.add_peer(peer_);
  net_.set_handler(peer_.id,
                   [this](Network&, const Message& m) { on_message(m); });
}

void Mediator::add_rule(RoutingRule rule) {
  if (rule.rule_id.empty() || rule.match_path.empty() ||
      rule.destination.empty()) {
    throw Error(Err::InvalidRecord, "routing rule with empty field");
  }
  rules_.push_back(std::move(rule));
  sort_rules(rules_);
}

void Mediator::load_rules(const std::string& path) {
  for (RoutingRule& r : load_rules_file(path)) add_rule(std::move(r));
}

void Mediator::add_profile(ClientProfile profile) {
  if (profile.identity.empty()) {
    throw Error(Err::InvalidRecord, "profile with empty identity");
  }
  profiles_[profile.identity] = std::move(profile);
}

void Mediator::load_profiles(const std::string& path) {
  for (ClientProfile& p : load_profiles_file(path)) add_profile(std::move(p));
}

const ClientProfile* Mediator::profile(const std::string& identity) const {
  auto it = profiles_.find(identity);
  return it == profiles_.end() ? nullptr : &it->second;
}

std::string Mediator::connect_client(const std::string& client_peer,
                                     NetworkInterface link) {
  if (!net_.has_peer(client_peer)) {
    net_.add_peer(Peer{client_peer, PeerRole::Edge, {link}});
  }
  std::string link_id = net_.open_direct(peer_.id, client_peer, link);
  client_links_.insert(link_id);
  return link_id;
}

void Mediator::register_public_address(const std::string& address,
                                       const std::string& peer_id,
                                       NetworkInterface link) {
  if (address.empty()) throw Error(Err::InvalidRecord, "empty public address");
  if (!net_.has_peer(peer_id)) {
    throw Error(Err::UnknownPeer, "no such host peer: " + peer_id);
  }
  std::string link_id = net_.open_direct(peer_.id, peer_id, link);
  host_links_.insert(link_id);
  public_hosts_[address] = PublicHost{peer_id, link_id};
}

void Mediator::register_wakeable_host(const std::string& peer_id) {
  wakeable_hosts_.insert(peer_id);
}

AuthResult Mediator::authenticate(const std::string& identity,
                                  const std::string& credential) const {
  // Unknown identities and wrong secrets run the same comparison against
  // a same-length digest, so neither timing shape nor response content
  // separates the two failure modes.
  static const std::string kAbsent(64, 'f');
  auto it = profiles_.find(identity);
  const std::string& stored =
      it != profiles_.end() ? it->second.credential_digest : kAbsent;
  std::string presented = credential_digest(credential);
  unsigned diff = presented.size() == stored.size() ? 0u : 1u;
  size_t n = std::min(presented.size(), stored.size());
  for (size_t i = 0; i < n; ++i) {
    diff |= static_cast<unsigned>(presented[i] ^ stored[i]);
  }
  if (it == profiles_.end()) diff |= 1u;
  return diff == 0 ? AuthResult::Granted : AuthResult::Denied;
}

std::string Mediator::route(const SoapEnvelope& env) const {
  const RoutingRule* rule = first_match(rules_, env.body);
  if (rule == nullptr) {
    throw Error(Err::NoRouteMatched,
                "no rule matches body element " + env.body.name.local);
  }
  return rule->destination;
}

std::string Mediator::trigger_wakeup(const std::string& host_peer,
                                     const std::string& requested_service,
                                     int64_t now_ms) {
  if (!wakeable_hosts_.count(host_peer)) {
    throw Error(Err::UnknownHost, "host not registered for wake-up: " + host_peer);
  }
  auto it = wake_.find(host_peer);
  if (it != wake_.end()) return it->second.correlation_id;  // one SMS only

  WakeState ws;
  ws.correlation_id = rng_.token();
  ws.triggered_at = now_ms;
  WakeupMessage wm{std::string(kWakeMagic), host_peer, ws.correlation_id,
                   requested_service, peer_.id};
  net_.send_sms(host_peer, wm.serialize(), now_ms);
  net_.emit_trace(now_ms, "wake",
                  host_peer + "\t" + ws.correlation_id + "\t" + requested_service);
  std::string corr = ws.correlation_id;
  int64_t window = kSmsLatencyMs + config_.boot_delay_ms +
                   2 * net_.worst_latency(host_peer) + kWakeWindowMarginMs;
  wake_[host_peer] = std::move(ws);
  net_.schedule(now_ms + window, [this, host_peer, corr](Network&) {
    auto w = wake_.find(host_peer);
    if (w == wake_.end() || w->second.correlation_id != corr) return;
    std::vector<std::string> mids = std::move(w->second.queued_mids);
    wake_.erase(w);
    int64_t at = net_.now();
    for (const std::string& mid : mids) {
      auto pit = pending_.find(mid);
      if (pit == pending_.end() || pit->second.resolved) continue;
      reports_[pit->second.report_idx].timings["wake"] =
          at - pit->second.queued_at;
      fail_pending(mid, "host-unreachable", at);
    }
  });
  return corr;
}

std::vector<ModuleAdvertisement> Mediator::discover(const DiscoveryQuery& q,
                                                    int64_t now_ms) const {
  return registry_.discover_modules(q, now_ms);
}

void Mediator::on_message(const Message& msg) {
  if (msg.link == LinkKind::Pipe) {
    if (msg.link_id.rfind("wakeack.", 0) == 0) {
      on_wake_ack(msg);
    } else {
      on_host_response(msg);
    }
    return;
  }
  if (msg.link == LinkKind::Direct) {
    if (client_links_.count(msg.link_id)) {
      on_client_request(msg);
    } else if (host_links_.count(msg.link_id)) {
      on_host_response(msg);
    } else {
      net_.emit_trace(msg.deliver_at, "drop", "unknown-link\t" + msg.link_id);
    }
  }
}

void Mediator::on_client_request(const Message& msg) {
  const int64_t t0 = msg.deliver_at;
  reports_.emplace_back();
  const size_t idx = reports_.size() - 1;
  reports_[idx].received_at = t0;

  RequestFrame frame;
  SoapEnvelope env;
  try {
    frame = RequestFrame::parse(msg.payload);
    env = parse_envelope(frame.soap);
  } catch (const Error&) {
    reports_[idx].status = "malformed";
    net_.emit_trace(t0, "fault", "-\tmalformed");
    send_frame_reply(msg.link_id, make_fault("malformed", "unparseable request"),
                     true, "", idx, t0);
    return;
  }

  const std::string mid = env.message_id();
  reports_[idx].message_id = mid;
  SecurityHeader hdr = SecurityHeader::read(env);
  const std::string identity = hdr.token_ref;
  reports_[idx].client_identity = identity;

  reports_[idx].timings["auth"] = config_.auth_stage_ms;
  int64_t at = t0 + config_.auth_stage_ms;
  if (authenticate(identity, hdr.credential) != AuthResult::Granted) {
    // Authentication faults are never encrypted: a reply secured to a
    // known identity would differ on the wire from one for an unknown
    // identity and leak which of the two failed.
    reports_[idx].status = "auth-failed";
    net_.emit_trace(t0, "fault", mid + "\tauth-failed");
    SoapEnvelope fault = make_fault("auth-failed", "authentication failed");
    fault.set_message_id(mid);
    send_frame_reply(msg.link_id, std::move(fault), true, "", idx, at);
    return;
  }
  reports_[idx].authenticated = true;

  auto dup = pending_.find(mid);
  if (dup != pending_.end()) {
    if (!dup->second.resolved) {
      reports_[idx].status = "malformed";
      net_.emit_trace(t0, "fault", mid + "\tduplicate-id");
      SoapEnvelope fault = make_fault("malformed", "duplicate message id");
      fault.set_message_id(mid);
      send_frame_reply(msg.link_id, std::move(fault), true, identity, idx, at);
      return;
    }
    pending_.erase(dup);
  }

  reports_[idx].timings["transform-in"] = config_.transform_stage_ms;
  at += config_.transform_stage_ms;
  OpenResult opened;
  bool open_ok = false;
  try {
    RsaKeyPair client_pub = keystore_.public_key(identity);
    opened = open_inbound(env, keys_, client_pub, t0,
                          config_.timestamp_skew_ms);
    open_ok = opened.verified && opened.fresh;
  } catch (const Error&) {
    open_ok = false;
  }
  if (!open_ok) {
    reports_[idx].status = "security-fault";
    net_.emit_trace(t0, "fault", mid + "\tsecurity-fault");
    SoapEnvelope fault =
        make_fault("security-fault", "verification or freshness failed");
    fault.set_message_id(mid);
    send_frame_reply(msg.link_id, std::move(fault), true, identity, idx, at);
    return;
  }

  reports_[idx].timings["route"] = config_.route_stage_ms;
  at += config_.route_stage_ms;
  const RoutingRule* rule = first_match(rules_, opened.env.body);
  std::optional<ServiceRecord> svc;
  if (rule != nullptr) svc = registry_.service(rule->destination);
  if (!svc) {
    reports_[idx].status = "no-route";
    if (rule != nullptr) reports_[idx].destination = rule->destination;
    net_.emit_trace(t0, "fault", mid + "\tno-route");
    SoapEnvelope fault = make_fault("no-route", "no destination for message");
    fault.set_message_id(mid);
    send_frame_reply(msg.link_id, std::move(fault), true, identity, idx, at);
    return;
  }
  const std::string dest = rule->destination;
  reports_[idx].destination = dest;
  net_.emit_trace(t0, "route", mid + "\t" + rule->rule_id + "\t" + dest);

  const ClientProfile& prof = profiles_.at(identity);
  if (!prof.allowed_services.empty() &&
      std::find(prof.allowed_services.begin(), prof.allowed_services.end(),
                dest) == prof.allowed_services.end()) {
    reports_[idx].status = "auth-failed";
    net_.emit_trace(t0, "fault", mid + "\tnot-allowed");
    SoapEnvelope fault = make_fault("auth-failed", "service not allowed");
    fault.set_message_id(mid);
    send_frame_reply(msg.link_id, std::move(fault), true, identity, idx, at);
    return;
  }

  TransformDirection direction = prof.capability.name == ProfileName::Full
                                     ? TransformDirection::FullToMobile
                                     : TransformDirection::None;
  reports_[idx].transformed = direction;

  Pending p;
  p.message_id = mid;
  p.client_identity = identity;
  p.client_link = msg.link_id;
  p.host_identity = svc->owner_identity;
  p.report_idx = idx;
  p.epoch = ++next_epoch_;

  SoapEnvelope fwd;
  try {
    KeyMaterial host_mat;
    host_mat.identity = svc->owner_identity;
    host_mat.rsa = keystore_.public_key(svc->owner_identity);
    host_mat.profile = SecurityProfile::mobile();
    fwd = reissue(opened.env, identity, true, keys_, host_mat,
                  SecurityProfile::mobile(), t0,
                  config_.timestamp_lifetime_ms, rng_);
  } catch (const Error&) {
    reports_[idx].status = "host-unreachable";
    net_.emit_trace(t0, "fault", mid + "\thost-unreachable");
    SoapEnvelope fault = make_fault("host-unreachable", "no key for host");
    fault.set_message_id(mid);
    send_frame_reply(msg.link_id, std::move(fault), true, identity, idx, at);
    return;
  }
  net_.emit_trace(t0, "transform",
                  mid + "\t" + transform_direction_name(direction));

  // Request size as the host will see it once opened: plaintext body,
  // security header minus the key-transport element.
  SoapEnvelope host_view = fwd;
  SecurityHeader vh = SecurityHeader::read(host_view);
  vh.encrypted_key.reset();
  vh.write(host_view);
  host_view.body = opened.env.body;
  reports_[idx].request_bytes = serialize_envelope(host_view).size();

  std::string fwd_path;
  if (std::holds_alternative<OverlayBinding>(svc->binding)) {
    const auto& ob = std::get<OverlayBinding>(svc->binding);
    p.forward_pipe = ob.pipe_id;
    p.host_peer = ob.peer_id;
    reports_[idx].binding_kind = "overlay";
    fwd_path = "/" + dest;
  } else {
    const auto& url = std::get<PublicUrl>(svc->binding);
    auto ph = public_hosts_.find(url.address);
    if (ph == public_hosts_.end()) {
      reports_[idx].status = "host-unreachable";
      reports_[idx].binding_kind = "public-url";
      net_.emit_trace(t0, "fault", mid + "\thost-unreachable");
      SoapEnvelope fault =
          make_fault("host-unreachable", "unregistered public address");
      fault.set_message_id(mid);
      send_frame_reply(msg.link_id, std::move(fault), true, identity, idx, at);
      return;
    }
    p.forward_link = ph->second.link_id;
    p.host_peer = ph->second.peer_id;
    reports_[idx].binding_kind = "public-url";
    fwd_path = url.path;
  }
  p.forward_payload = RequestFrame{fwd_path, serialize_envelope(fwd)}.to_bytes();
  const uint64_t epoch = p.epoch;
  pending_.emplace(mid, std::move(p));

  net_.schedule(at, [this, mid, epoch](Network&) {
    auto it = pending_.find(mid);
    if (it == pending_.end() || it->second.epoch != epoch ||
        it->second.resolved) {
      return;
    }
    forward_attempt(mid, net_.now());
  });
}

void Mediator::forward_attempt(const std::string& mid, int64_t now_ms) {
  auto it = pending_.find(mid);
  if (it == pending_.end() || it->second.resolved) return;
  dispatch_forward(it->second, reports_[it->second.report_idx], now_ms);
}

void Mediator::dispatch_forward(Pending& p, MediationReport& r,
                                int64_t now_ms) {
  try {
    SendReceipt receipt;
    if (!p.forward_pipe.empty()) {
      if (!net_.has_pipe(p.forward_pipe)) {
        net_.open_pipe(peer_.id, p.forward_pipe, p.host_peer);
      }
      receipt = net_.send(p.forward_pipe, p.forward_payload, now_ms);
    } else {
      receipt = net_.send_direct(p.forward_link, peer_.id, p.forward_payload,
                                 now_ms);
    }
    r.forwarded_at = now_ms;
    r.forward_deliver_at = receipt.deliver_at;
    const std::string mid = p.message_id;
    const uint64_t epoch = p.epoch;
    net_.schedule(now_ms + config_.response_timeout_ms,
                  [this, mid, epoch](Network&) {
                    auto it = pending_.find(mid);
                    if (it == pending_.end() || it->second.epoch != epoch ||
                        it->second.resolved) {
                      return;
                    }
                    fail_pending(mid, "timeout", net_.now());
                  });
  } catch (const Error& e) {
    bool down = e.code() == Err::PeerUnreachable || e.code() == Err::HostSleeping;
    if (down && wakeable_hosts_.count(p.host_peer)) {
      trigger_wakeup(p.host_peer, r.destination, now_ms);
      wake_[p.host_peer].queued_mids.push_back(p.message_id);
      p.queued_at = now_ms;
      r.woke_host = true;
    } else {
      fail_pending(p.message_id, "host-unreachable", now_ms);
    }
  }
}

void Mediator::flush_wake_queue(const std::string& host_peer, int64_t now_ms) {
  auto it = wake_.find(host_peer);
  if (it == wake_.end()) return;
  std::vector<std::string> mids = std::move(it->second.queued_mids);
  wake_.erase(it);
  for (const std::string& mid : mids) {
    auto pit = pending_.find(mid);
    if (pit == pending_.end() || pit->second.resolved) continue;
    Pending& p = pit->second;
    MediationReport& r = reports_[p.report_idx];
    r.timings["wake"] = now_ms - p.queued_at;
    dispatch_forward(p, r, now_ms);
  }
}

void Mediator::on_wake_ack(const Message& msg) {
  const int64_t ta = msg.deliver_at;
  std::string host;
  std::string corr;
  try {
    RequestFrame frame = RequestFrame::parse(msg.payload);
    SoapEnvelope env = parse_envelope(frame.soap);
    const XmlElement* c = env.body.find("CorrelationId");
    const XmlElement* h = env.body.find("Host");
    if (env.body.name.local != "WakeAck" || c == nullptr || h == nullptr) {
      throw Error(Err::MalformedXml, "wake ack shape");
    }
    corr = c->text_content();
    host = h->text_content();
  } catch (const Error&) {
    net_.emit_trace(ta, "drop", "bad-wake-ack");
    return;
  }
  auto it = wake_.find(host);
  if (it == wake_.end() || it->second.correlation_id != corr) {
    net_.emit_trace(ta, "drop", "stale-wake-ack\t" + host);
    return;
  }
  net_.emit_trace(ta, "wake-ack", host + "\t" + corr);
  flush_wake_queue(host, ta);
}

void Mediator::on_host_response(const Message& msg) {
  const int64_t ta = msg.deliver_at;
  ResponseFrame frame;
  SoapEnvelope env;
  try {
    frame = ResponseFrame::parse(msg.payload);
    env = parse_envelope(frame.soap);
  } catch (const Error&) {
    net_.emit_trace(ta, "drop", "unparseable-response\t" + msg.link_id);
    return;
  }
  const std::string mid = env.message_id();
  auto it = pending_.find(mid);
  if (it == pending_.end() || it->second.resolved) {
    net_.emit_trace(ta, "drop", "orphan-response\t" + mid);
    return;
  }
  Pending& p = it->second;
  MediationReport& r = reports_[p.report_idx];
  r.response_at = ta;

  if (frame.status == FrameStatus::Asleep) {
    fail_pending(mid, "host-unreachable", ta);
    return;
  }

  r.timings["transform-out"] = config_.transform_stage_ms;
  const int64_t tr = ta + config_.transform_stage_ms;

  OpenResult opened;
  bool open_ok = false;
  try {
    RsaKeyPair host_pub = keystore_.public_key(p.host_identity);
    opened = open_inbound(env, keys_, host_pub, ta, config_.timestamp_skew_ms);
    open_ok = opened.verified && opened.fresh;
  } catch (const Error&) {
    open_ok = false;
  }
  if (!open_ok) {
    p.resolved = true;
    r.status = "security-fault";
    net_.emit_trace(ta, "fault", mid + "\tsecurity-fault");
    SoapEnvelope fault =
        make_fault("security-fault", "host response failed verification");
    fault.set_message_id(mid);
    send_frame_reply(p.client_link, std::move(fault), true, p.client_identity,
                     p.report_idx, tr);
    return;
  }

  if (const XmlElement* pm = opened.env.header("ProcessingMs")) {
    try {
      r.device_ms = to_int(pm->text_content(), "ProcessingMs");
    } catch (const Error&) {
      r.device_ms = 0;
    }
  }
  SoapEnvelope host_plain = opened.env;
  host_plain.remove_header("Security");
  host_plain.remove_header("ProcessingMs");
  r.response_bytes = serialize_envelope(host_plain).size();

  const bool fault = is_fault(opened.env);
  r.status = fault ? fault_code(opened.env) : "ok";
  p.resolved = true;

  SoapEnvelope reply_plain = opened.env;
  reply_plain.remove_header("Security");
  reply_plain.put_header(relayed_from(p.host_identity, true));
  reply_plain.set_message_id(mid);
  TransformDirection out_dir = r.transformed == TransformDirection::FullToMobile
                                   ? TransformDirection::MobileToFull
                                   : TransformDirection::None;
  net_.emit_trace(ta, "transform",
                  mid + "\t" + transform_direction_name(out_dir));
  send_frame_reply(p.client_link, std::move(reply_plain), fault,
                   p.client_identity, p.report_idx, tr);
}

void Mediator::fail_pending(const std::string& mid, const std::string& code,
                            int64_t now_ms) {
  auto it = pending_.find(mid);
  if (it == pending_.end() || it->second.resolved) return;
  Pending& p = it->second;
  p.resolved = true;
  MediationReport& r = reports_[p.report_idx];
  r.status = code;
  if (r.forwarded_at > 0 && r.response_at == 0) {
    // Forwarded but never answered: the wait until the fault is raised is
    // mediator-held time, not transmission.
    r.timings["wait"] = now_ms - r.forwarded_at;
  }
  net_.emit_trace(now_ms, "fault", mid + "\t" + code);
  SoapEnvelope fault = make_fault(code, code);
  fault.set_message_id(mid);
  send_frame_reply(p.client_link, std::move(fault), true, p.client_identity,
                   p.report_idx, now_ms);
}

KeyMaterial Mediator::client_material(const std::string& identity) const {
  KeyMaterial m;
  m.identity = identity;
  m.rsa = keystore_.public_key(identity);
  auto it = profiles_.find(identity);
  m.profile = it != profiles_.end() ? it->second.capability
                                    : SecurityProfile::mobile();
  return m;
}

void Mediator::send_frame_reply(const std::string& link, SoapEnvelope plain,
                                bool fault, std::string secure_to,
                                size_t report_idx, int64_t at_ms) {
  net_.schedule(at_ms, [this, link, plain = std::move(plain), fault,
                        secure_to = std::move(secure_to),
                        report_idx](Network&) mutable {
    const int64_t now = net_.now();
    std::string bytes;
    if (!secure_to.empty() && keystore_.has(secure_to)) {
      try {
        KeyMaterial client = client_material(secure_to);
        SoapEnvelope sec =
            secure_outbound(plain, keys_, client, client.profile, now,
                            config_.timestamp_lifetime_ms, rng_);
        bytes = ResponseFrame{fault ? FrameStatus::Fault : FrameStatus::Ok,
                              serialize_envelope(sec)}
                    .to_bytes();
      } catch (const Error&) {
        bytes.clear();
      }
    }
    if (bytes.empty()) {
      bytes = ResponseFrame{fault ? FrameStatus::Fault : FrameStatus::Ok,
                            serialize_envelope(plain)}
                  .to_bytes();
    }
    MediationReport& r = reports_[report_idx];
    r.replied_at = now;
    try {
      SendReceipt receipt = net_.send_direct(link, peer_.id, std::move(bytes), now);
      r.reply_deliver_at = receipt.deliver_at;
    } catch (const Error&) {
      net_.emit_trace(now, "drop", "reply\t" + r.message_id);
    }
  });
}

}  // namespace mwsmf
