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

#include "mwsmf/overlay.hpp"

#include <cmath>

#include "mwsmf/errors.hpp"

namespace mwsmf {

const char* peer_role_name(PeerRole role) {
  return role == PeerRole::Super ? "SUPER" : "EDGE";
}

const char* link_kind_name(LinkKind kind) {
  switch (kind) {
    case LinkKind::Pipe:
      return "pipe";
    case LinkKind::Direct:
      return "direct";
    case LinkKind::Sms:
      return "sms";
  }
  return "?";
}

namespace {

void validate_peer(const Peer& p) {
  if (p.id.empty()) throw Error(Err::InvalidRecord, "peer without id");
  if (p.interfaces.empty()) {
    throw Error(Err::InvalidRecord, p.id + ": peer needs an interface");
  }
  for (const auto& iface : p.interfaces) {
    if (iface.bandwidth_bytes_per_ms <= 0) {
      throw Error(Err::InvalidRecord,
                  p.id + ": interface " + iface.kind + " bandwidth must be positive");
    }
    if (iface.latency_ms < 0) {
      throw Error(Err::InvalidRecord,
                  p.id + ": interface " + iface.kind + " latency must be non-negative");
    }
  }
}

}  // namespace

NetworkInterface select_interface(const Peer& peer) {
  const NetworkInterface* best = nullptr;
  double best_cost = 0;
  for (const auto& iface : peer.interfaces) {
    if (!iface.up) continue;
    double cost =
        static_cast<double>(iface.latency_ms) + 1000.0 / iface.bandwidth_bytes_per_ms;
    if (!best || cost < best_cost ||
        (cost == best_cost && iface.kind < best->kind)) {
      best = &iface;
      best_cost = cost;
    }
  }
  if (!best) {
    throw Error(Err::NoUsableInterface, peer.id + ": all interfaces down");
  }
  return *best;
}

int64_t transmission_ms(size_t bytes, const NetworkInterface& iface) {
  if (bytes == 0) return 0;
  return static_cast<int64_t>(
      std::ceil(static_cast<double>(bytes) / iface.bandwidth_bytes_per_ms));
}

void Network::add_peer(Peer peer) {
  validate_peer(peer);
  auto it = peers_.find(peer.id);
  if (it != peers_.end()) {
    throw Error(Err::InvalidRecord, "duplicate peer id: " + peer.id);
  }
  PeerState st;
  st.joined = peer.role == PeerRole::Super;
  st.peer = std::move(peer);
  peers_.emplace(st.peer.id, std::move(st));
}

bool Network::has_peer(const std::string& id) const {
  return peers_.count(id) > 0;
}

const Peer& Network::peer(const std::string& id) const {
  return state(id).peer;
}

Network::PeerState& Network::state(const std::string& id) {
  auto it = peers_.find(id);
  if (it == peers_.end()) throw Error(Err::UnknownPeer, id);
  return it->second;
}

const Network::PeerState& Network::state(const std::string& id) const {
  auto it = peers_.find(id);
  if (it == peers_.end()) throw Error(Err::UnknownPeer, id);
  return it->second;
}

bool Network::is_reachable(const PeerState& st) const {
  return st.joined && !st.departed;
}

void Network::join(const Peer& peer, const std::string& super_id,
                   int64_t now_ms) {
  auto sit = peers_.find(super_id);
  if (sit == peers_.end() || sit->second.peer.role != PeerRole::Super ||
      !is_reachable(sit->second)) {
    throw Error(Err::NoSuperPeer, super_id);
  }
  if (peer.role != PeerRole::Edge) {
    throw Error(Err::InvalidRecord,
                peer.id + ": only edge peers join; super peers are adjacent");
  }

  auto it = peers_.find(peer.id);
  if (it == peers_.end()) {
    validate_peer(peer);
    NetworkInterface via = select_interface(peer);  // NoUsableInterface
    PeerState st;
    st.peer = peer;
    st.joined = true;
    st.super_id = super_id;
    it = peers_.emplace(peer.id, std::move(st)).first;
    sit->second.routes[peer.id] = RouteEntry{true, via.kind, now_ms};
  } else {
    // Re-join: membership book-keeping only, stored interfaces stay.
    PeerState& st = it->second;
    NetworkInterface via = select_interface(st.peer);
    st.departed = false;
    st.joined = true;
    st.super_id = super_id;
    sit->second.routes[peer.id] = RouteEntry{true, via.kind, now_ms};
  }
  trace(now_ms, "join", peer.id + "\t" + super_id);
}

void Network::leave(const std::string& peer_id, int64_t now_ms) {
  PeerState& st = state(peer_id);
  if (!is_reachable(st)) {
    throw Error(Err::UnknownPeer, peer_id + ": not currently joined");
  }
  st.departed = true;
  if (!st.super_id.empty()) {
    auto sit = peers_.find(st.super_id);
    if (sit != peers_.end()) {
      auto rit = sit->second.routes.find(peer_id);
      if (rit != sit->second.routes.end()) {
        rit->second.reachable = false;
        rit->second.last_seen = now_ms;
      }
    }
  }
  trace(now_ms, "leave", peer_id);
}

bool Network::reachable(const std::string& peer_id) const {
  auto it = peers_.find(peer_id);
  return it != peers_.end() && is_reachable(it->second);
}

std::optional<RouteEntry> Network::route_entry(
    const std::string& super_id, const std::string& peer_id) const {
  const PeerState& st = state(super_id);
  auto it = st.routes.find(peer_id);
  if (it == st.routes.end()) return std::nullopt;
  return it->second;
}

void Network::set_interface_up(const std::string& peer_id,
                               const std::string& kind, bool up) {
  PeerState& st = state(peer_id);
  for (auto& iface : st.peer.interfaces) {
    if (iface.kind == kind) {
      iface.up = up;
      return;
    }
  }
  throw Error(Err::InvalidRecord, peer_id + ": no interface " + kind);
}

std::vector<std::string> Network::resolve_route(
    const std::string& super_id, const std::string& target) const {
  auto sit = peers_.find(super_id);
  if (sit == peers_.end() || sit->second.peer.role != PeerRole::Super ||
      !is_reachable(sit->second)) {
    throw Error(Err::NoSuperPeer, super_id);
  }
  const PeerState& tgt = state(target);  // UnknownPeer
  if (!is_reachable(tgt)) throw Error(Err::PeerUnreachable, target);
  if (tgt.peer.role == PeerRole::Super) return {target};
  return {tgt.super_id, target};
}

Pipe Network::open_pipe(const std::string& from, const std::string& pipe_id,
                        const std::string& to) {
  if (!reachable(from)) throw Error(Err::PeerUnreachable, from);
  if (!reachable(to)) throw Error(Err::PeerUnreachable, to);
  auto it = pipes_.find(pipe_id);
  if (it != pipes_.end()) {
    if (it->second.from != from || it->second.to != to) {
      throw Error(Err::InvalidRecord,
                  "pipe id already bound to other endpoints: " + pipe_id);
    }
    return it->second;
  }
  Pipe p{pipe_id, from, to, 0};
  pipes_.emplace(pipe_id, p);
  return p;
}

bool Network::has_pipe(const std::string& pipe_id) const {
  return pipes_.count(pipe_id) > 0;
}

const Pipe& Network::pipe(const std::string& pipe_id) const {
  auto it = pipes_.find(pipe_id);
  if (it == pipes_.end()) {
    throw Error(Err::InvalidRecord, "unknown pipe: " + pipe_id);
  }
  return it->second;
}

std::vector<Network::Hop> Network::compute_path(const std::string& from,
                                                const std::string& to) const {
  if (from == to) return {};
  const PeerState& src = state(from);
  const PeerState& dst = state(to);

  auto super_of = [&](const PeerState& st) -> const std::string& {
    if (st.super_id.empty() || !reachable(st.super_id)) {
      throw Error(Err::NoSuperPeer, st.peer.id + ": no reachable super peer");
    }
    return st.super_id;
  };

  std::vector<Hop> hops;
  if (src.peer.role == PeerRole::Edge) {
    const std::string& sf = super_of(src);
    hops.push_back({from, sf});
    if (to == sf) return hops;
    if (dst.peer.role == PeerRole::Super) {
      hops.push_back({sf, to});
      return hops;
    }
    const std::string& st_ = super_of(dst);
    if (st_ != sf) hops.push_back({sf, st_});
    hops.push_back({st_, to});
    return hops;
  }
  // SUPER source.
  if (dst.peer.role == PeerRole::Super) {
    hops.push_back({from, to});
    return hops;
  }
  const std::string& st_ = super_of(dst);
  if (st_ != from) hops.push_back({from, st_});
  hops.push_back({st_, to});
  return hops;
}

NetworkInterface Network::hop_interface(const Hop& hop) const {
  const PeerState& a = state(hop.from);
  const PeerState& b = state(hop.to);
  if (a.peer.role == PeerRole::Edge) return select_interface(a.peer);
  if (b.peer.role == PeerRole::Edge) return select_interface(b.peer);
  return select_interface(a.peer);  // SUPER<->SUPER: sender's uplink
}

SendReceipt Network::send(const std::string& pipe_id, std::string payload,
                          int64_t now_ms) {
  auto it = pipes_.find(pipe_id);
  if (it == pipes_.end()) {
    throw Error(Err::InvalidRecord, "unknown pipe: " + pipe_id);
  }
  const Pipe& p = it->second;
  if (!reachable(p.from)) throw Error(Err::PeerUnreachable, p.from);
  if (!reachable(p.to)) throw Error(Err::PeerUnreachable, p.to);

  int64_t cost = 0;
  for (const auto& hop : compute_path(p.from, p.to)) {
    NetworkInterface iface = hop_interface(hop);
    cost += iface.latency_ms + transmission_ms(payload.size(), iface);
  }

  Message msg;
  msg.link = LinkKind::Pipe;
  msg.link_id = pipe_id;
  msg.from = p.from;
  msg.to = p.to;
  msg.payload = std::move(payload);
  msg.sent_at = now_ms;
  msg.deliver_at = now_ms + cost;
  size_t bytes = msg.payload.size();
  std::string from = msg.from;
  std::string to = msg.to;
  int64_t at = enqueue_message(std::move(msg), "P:" + pipe_id);
  trace(now_ms, "send",
        pipe_id + "\t" + from + "\t" + to + "\t" + std::to_string(bytes) +
            "\t" + std::to_string(at));
  return SendReceipt{at};
}

std::string Network::open_direct(const std::string& a, const std::string& b,
                                 NetworkInterface link) {
  state(a);
  state(b);
  if (link.bandwidth_bytes_per_ms <= 0) {
    throw Error(Err::InvalidRecord, "direct link bandwidth must be positive");
  }
  std::string id = "link-" + std::to_string(next_link_++);
  direct_links_[id] = DirectLink{a, b, std::move(link)};
  return id;
}

SendReceipt Network::send_direct(const std::string& link_id,
                                 const std::string& from, std::string payload,
                                 int64_t now_ms) {
  auto it = direct_links_.find(link_id);
  if (it == direct_links_.end()) {
    throw Error(Err::InvalidRecord, "unknown direct link: " + link_id);
  }
  const DirectLink& dl = it->second;
  if (from != dl.a && from != dl.b) {
    throw Error(Err::InvalidRecord, from + " is not on link " + link_id);
  }
  const std::string& to = from == dl.a ? dl.b : dl.a;
  if (state(to).departed) throw Error(Err::PeerUnreachable, to);

  int64_t cost = dl.iface.latency_ms + transmission_ms(payload.size(), dl.iface);
  Message msg;
  msg.link = LinkKind::Direct;
  msg.link_id = link_id;
  msg.from = from;
  msg.to = to;
  msg.payload = std::move(payload);
  msg.sent_at = now_ms;
  msg.deliver_at = now_ms + cost;
  size_t bytes = msg.payload.size();
  int64_t at = enqueue_message(std::move(msg), "D:" + link_id);
  trace(now_ms, "direct-send",
        link_id + "\t" + from + "\t" + to + "\t" + std::to_string(bytes) +
            "\t" + std::to_string(at));
  return SendReceipt{at};
}

SendReceipt Network::send_sms(const std::string& to, std::string payload,
                              int64_t now_ms) {
  state(to);  // UnknownPeer
  if (payload.size() > kSmsPayloadCap) {
    throw Error(Err::InvalidRecord,
                "SMS payload exceeds " + std::to_string(kSmsPayloadCap) +
                    " bytes");
  }
  Message msg;
  msg.link = LinkKind::Sms;
  msg.from = "";
  msg.to = to;
  msg.payload = std::move(payload);
  msg.sent_at = now_ms;
  msg.deliver_at = now_ms + kSmsLatencyMs;
  size_t bytes = msg.payload.size();
  int64_t at = enqueue_message(std::move(msg), "!sms");
  trace(now_ms, "sms-send",
        to + "\t" + std::to_string(bytes) + "\t" + std::to_string(at));
  return SendReceipt{at};
}

void Network::schedule(int64_t at_ms, TimerFn fn) {
  Event ev;
  ev.at = at_ms;
  ev.order_key = "";
  ev.seq = next_seq_++;
  ev.timer = std::move(fn);
  queue_.push(std::move(ev));
}

int64_t Network::enqueue_message(Message msg, const std::string& order_key) {
  int64_t& floor = fifo_floor_[order_key];
  if (msg.deliver_at < floor) msg.deliver_at = floor;
  floor = msg.deliver_at;
  msg.seq = next_seq_++;
  ++sent_;
  if (send_observer_) send_observer_(msg);
  Event ev;
  ev.at = msg.deliver_at;
  ev.order_key = order_key;
  ev.seq = msg.seq;
  ev.message = std::move(msg);
  int64_t at = ev.at;
  queue_.push(std::move(ev));
  return at;
}

std::map<std::string, size_t> Network::advance_clock(int64_t to_ms) {
  if (to_ms < now_) {
    throw Error(Err::ClockMovedBackwards,
                std::to_string(to_ms) + " < " + std::to_string(now_));
  }
  std::map<std::string, size_t> counts;
  while (!queue_.empty() && queue_.top().at <= to_ms) {
    Event ev = queue_.top();
    queue_.pop();
    now_ = ev.at;
    if (ev.message) {
      const Message& msg = *ev.message;
      PeerState& dst = state(msg.to);
      bool deliverable = msg.link == LinkKind::Sms ||
                         (msg.link == LinkKind::Direct ? !dst.departed
                                                       : is_reachable(dst));
      if (!deliverable) {
        ++failed_;
        trace(now_, "drop", msg.link_id + "\t" + msg.to + "\t" + "unreachable");
        continue;
      }
      ++delivered_;
      ++counts[msg.to];
      if (msg.link == LinkKind::Pipe) {
        auto pit = pipes_.find(msg.link_id);
        if (pit != pipes_.end()) ++pit->second.delivered_count;
      }
      trace(now_, msg.link == LinkKind::Sms ? "sms-deliver" : "deliver",
            msg.link_id + "\t" + msg.from + "\t" + msg.to + "\t" +
                std::to_string(msg.payload.size()));
      MessageHandler& h =
          msg.link == LinkKind::Sms ? dst.sms_handler : dst.handler;
      if (h) {
        h(*this, msg);
      } else {
        dst.inbox.push_back(msg);
      }
    } else if (ev.timer) {
      ev.timer(*this);
    }
  }
  now_ = to_ms;
  return counts;
}

int64_t Network::drain() {
  while (!queue_.empty()) {
    advance_clock(queue_.top().at);
  }
  return now_;
}

void Network::set_handler(const std::string& peer_id, MessageHandler handler) {
  state(peer_id).handler = std::move(handler);
}

void Network::set_sms_handler(const std::string& peer_id,
                              MessageHandler handler) {
  state(peer_id).sms_handler = std::move(handler);
}

std::vector<Message> Network::take_inbox(const std::string& peer_id) {
  std::vector<Message> out;
  out.swap(state(peer_id).inbox);
  return out;
}

void Network::set_send_observer(std::function<void(const Message&)> fn) {
  send_observer_ = std::move(fn);
}

void Network::set_trace(TraceFn fn) { trace_ = std::move(fn); }

void Network::emit_trace(int64_t at, std::string_view event,
                         std::string_view fields) {
  trace(at, event, fields);
}

void Network::trace(int64_t at, std::string_view event,
                    std::string_view fields) {
  if (trace_) trace_(at, event, fields);
}

int64_t Network::path_cost(const std::string& from, const std::string& to,
                           size_t bytes) const {
  int64_t cost = 0;
  for (const auto& hop : compute_path(from, to)) {
    NetworkInterface iface = hop_interface(hop);
    cost += iface.latency_ms + transmission_ms(bytes, iface);
  }
  return cost;
}

int64_t Network::worst_latency(const std::string& peer_id) const {
  const PeerState& st = state(peer_id);
  int64_t worst = 0;
  for (const auto& iface : st.peer.interfaces) {
    worst = std::max(worst, iface.latency_ms);
  }
  return worst;
}

}  // namespace mwsmf
