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

#ifndef MWSMF_OVERLAY_HPP
#define MWSMF_OVERLAY_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace mwsmf {

inline constexpr int64_t kSmsLatencyMs = 1000;
inline constexpr size_t kSmsPayloadCap = 160;

enum class PeerRole { Edge, Super };

const char* peer_role_name(PeerRole role);

struct NetworkInterface {
  std::string kind;  // "gprs", "wifi", "ethernet", ...
  int64_t latency_ms = 0;
  double bandwidth_bytes_per_ms = 1.0;
  bool up = true;
};

/// Logical device. The id is the address: it never changes when the
/// active interface does.
struct Peer {
  std::string id;
  PeerRole role = PeerRole::Edge;
  std::vector<NetworkInterface> interfaces;
};

/// Ordered FIFO channel between two peers.
struct Pipe {
  std::string pipe_id;
  std::string from;
  std::string to;
  uint64_t delivered_count = 0;
};

enum class LinkKind { Pipe, Direct, Sms };

const char* link_kind_name(LinkKind kind);

struct Message {
  LinkKind link = LinkKind::Pipe;
  std::string link_id;  // pipe id, direct-link id, or "" for SMS
  std::string from;
  std::string to;
  std::string payload;
  int64_t sent_at = 0;
  int64_t deliver_at = 0;
  uint64_t seq = 0;
};

struct SendReceipt {
  int64_t deliver_at = 0;
};

struct RouteEntry {
  bool reachable = false;
  std::string via_interface;
  int64_t last_seen = 0;
};

/// Cheapest up interface for a nominal 1000-byte message:
/// minimize latency_ms + 1000/bandwidth, ties by kind ascending.
/// Throws Error(NoUsableInterface).
NetworkInterface select_interface(const Peer& peer);

/// ceil(bytes / bandwidth) in whole milliseconds.
int64_t transmission_ms(size_t bytes, const NetworkInterface& iface);

/// Discrete-event overlay simulation: super-peer routing, FIFO pipes with
/// a latency/bandwidth delay model, direct Internet-side links, and an SMS
/// side channel that reaches even departed peers.
///
/// Single logical thread of control: all mutation happens through the
/// membership/send calls and advance_clock, which runs delivery handlers
/// inline. Handlers may send and schedule, and must not block.
class Network {
 public:
  using MessageHandler = std::function<void(Network&, const Message&)>;
  using TimerFn = std::function<void(Network&)>;
  /// (time, event, tab-separated fields)
  using TraceFn = std::function<void(int64_t, std::string_view, std::string_view)>;

  Network() = default;

  /// Registers a device. SUPER peers become immediately reachable and
  /// mutually adjacent; EDGE peers stay unreachable until they join.
  void add_peer(Peer peer);
  bool has_peer(const std::string& id) const;
  const Peer& peer(const std::string& id) const;  // throws UnknownPeer

  /// Attaches an EDGE peer to a super peer (registering it on first
  /// contact). Re-join refreshes last_seen and restores reachability.
  /// Throws NoSuperPeer, NoUsableInterface.
  void join(const Peer& peer, const std::string& super_id, int64_t now_ms);
  /// Marks the peer departed; its pipes fail until it re-joins. Throws
  /// UnknownPeer when the peer is not currently joined.
  void leave(const std::string& peer_id, int64_t now_ms);
  bool reachable(const std::string& peer_id) const;
  std::optional<RouteEntry> route_entry(const std::string& super_id,
                                        const std::string& peer_id) const;
  void set_interface_up(const std::string& peer_id, const std::string& kind,
                        bool up);

  /// Path from the super peer's table to target: [target] when adjacent,
  /// [other_super, target] for an edge joined elsewhere. Throws
  /// NoSuperPeer, UnknownPeer, PeerUnreachable.
  std::vector<std::string> resolve_route(const std::string& super_id,
                                         const std::string& target) const;

  /// Throws PeerUnreachable when either endpoint is down.
  Pipe open_pipe(const std::string& from, const std::string& pipe_id,
                 const std::string& to);
  bool has_pipe(const std::string& pipe_id) const;
  const Pipe& pipe(const std::string& pipe_id) const;

  /// Enqueues for delivery at now + hop costs; per-pipe FIFO is preserved
  /// even when a later, smaller message would otherwise overtake.
  SendReceipt send(const std::string& pipe_id, std::string payload,
                   int64_t now_ms);

  /// Internet-side point-to-point link with its own delay parameters,
  /// outside the overlay routing (and outside overlay traffic policy).
  std::string open_direct(const std::string& a, const std::string& b,
                          NetworkInterface link);
  SendReceipt send_direct(const std::string& link_id, const std::string& from,
                          std::string payload, int64_t now_ms);

  /// Fixed-latency paging channel; reaches departed peers. Throws
  /// UnknownPeer; payloads above kSmsPayloadCap are rejected.
  SendReceipt send_sms(const std::string& to, std::string payload,
                       int64_t now_ms);

  void schedule(int64_t at_ms, TimerFn fn);

  /// Delivers everything due by `to` in (deliver_at, link id, sequence)
  /// order, timers first within a tick. Returns per-peer delivery counts.
  /// Throws ClockMovedBackwards.
  std::map<std::string, size_t> advance_clock(int64_t to_ms);
  /// Advances until no events remain; returns the final clock.
  int64_t drain();
  int64_t now() const { return now_; }

  void set_handler(const std::string& peer_id, MessageHandler handler);
  void set_sms_handler(const std::string& peer_id, MessageHandler handler);
  std::vector<Message> take_inbox(const std::string& peer_id);

  /// Observer invoked synchronously for every pipe/direct/SMS send, with
  /// the full payload; used by traffic-policy checks.
  void set_send_observer(std::function<void(const Message&)> fn);
  void set_trace(TraceFn fn);
  /// Lets attached components write into the shared trace stream.
  void emit_trace(int64_t at, std::string_view event, std::string_view fields);

  /// Total delay for `bytes` from `from` to `to` along the current route.
  int64_t path_cost(const std::string& from, const std::string& to,
                    size_t bytes) const;
  /// Largest interface latency a peer declares; the conservative bound
  /// used to size wake windows for hosts that are currently unreachable.
  int64_t worst_latency(const std::string& peer_id) const;

  uint64_t sent_count() const { return sent_; }
  uint64_t delivered_count() const { return delivered_; }
  uint64_t failed_count() const { return failed_; }

 private:
  struct PeerState {
    Peer peer;
    bool joined = false;    // edges: joined at a super; supers: registered
    bool departed = false;  // left after joining
    std::string super_id;   // edges only
    std::map<std::string, RouteEntry> routes;  // supers only
    std::vector<Message> inbox;
    MessageHandler handler;
    MessageHandler sms_handler;
  };

  struct DirectLink {
    std::string a;
    std::string b;
    NetworkInterface iface;
  };

  struct Hop {
    std::string from;
    std::string to;
  };

  struct Event {
    int64_t at = 0;
    std::string order_key;  // "" for timers: they fire first within a tick
    uint64_t seq = 0;
    std::optional<Message> message;
    TimerFn timer;

    bool operator>(const Event& other) const {
      return std::tie(at, order_key, seq) >
             std::tie(other.at, other.order_key, other.seq);
    }
  };

  PeerState& state(const std::string& id);
  const PeerState& state(const std::string& id) const;
  bool is_reachable(const PeerState& st) const;
  std::vector<Hop> compute_path(const std::string& from,
                                const std::string& to) const;
  NetworkInterface hop_interface(const Hop& hop) const;
  int64_t enqueue_message(Message msg, const std::string& order_key);
  void trace(int64_t at, std::string_view event, std::string_view fields);

  int64_t now_ = 0;
  uint64_t next_seq_ = 0;
  uint64_t next_link_ = 0;
  std::map<std::string, PeerState> peers_;
  std::map<std::string, Pipe> pipes_;
  std::map<std::string, int64_t> fifo_floor_;  // per link: last deliver_at
  std::map<std::string, DirectLink> direct_links_;
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue_;
  std::function<void(const Message&)> send_observer_;
  TraceFn trace_;
  uint64_t sent_ = 0;
  uint64_t delivered_ = 0;
  uint64_t failed_ = 0;
};

}  // namespace mwsmf

#endif  // MWSMF_OVERLAY_HPP
