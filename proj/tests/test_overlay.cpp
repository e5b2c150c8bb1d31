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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "mwsmf/errors.hpp"
#include "mwsmf/overlay.hpp"

using namespace mwsmf;

namespace {

Peer super_peer(const std::string& id) {
  return Peer{id, PeerRole::Super, {{"ethernet", 5, 1000.0, true}}};
}

Peer edge_peer(const std::string& id, const std::string& kind, int64_t lat,
               double bw) {
  return Peer{id, PeerRole::Edge, {{kind, lat, bw, true}}};
}

// Independent delay arithmetic: latency plus ceil(bytes/bandwidth) per hop.
int64_t leg_ms(size_t bytes, int64_t lat, double bw) {
  if (bytes == 0) return lat;
  return lat + int64_t(std::ceil(double(bytes) / bw));
}

}  // namespace

TEST_CASE("interface selection picks the cheapest up link") {
  Peer p{"dev",
         PeerRole::Edge,
         {{"gprs", 600, 5.0, true}, {"wifi", 20, 500.0, true}}};
  CHECK(select_interface(p).kind == "wifi");

  p.interfaces[1].up = false;
  CHECK(select_interface(p).kind == "gprs");

  p.interfaces[0].up = false;
  CHECK_THROWS_AS(select_interface(p), Error);
}

TEST_CASE("interface selection breaks ties by kind") {
  Peer p{"dev",
         PeerRole::Edge,
         {{"zeta", 10, 100.0, true}, {"alpha", 10, 100.0, true}}};
  CHECK(select_interface(p).kind == "alpha");
}

TEST_CASE("transmission time is a byte-count ceiling") {
  NetworkInterface iface{"gprs", 600, 5.0, true};
  CHECK(transmission_ms(0, iface) == 0);
  CHECK(transmission_ms(1, iface) == 1);
  CHECK(transmission_ms(5, iface) == 1);
  CHECK(transmission_ms(6, iface) == 2);
  CHECK(transmission_ms(1000, iface) == 200);
  NetworkInterface frac{"x", 0, 3.0, true};
  CHECK(transmission_ms(1000, frac) == 334);
}

TEST_CASE("membership lifecycle") {
  Network net;
  net.add_peer(super_peer("sup"));
  CHECK(net.reachable("sup"));  // supers are reachable at registration

  Peer host = edge_peer("host", "gprs", 600, 5.0);
  net.add_peer(host);
  CHECK(!net.reachable("host"));  // edges wait for a join

  net.join(host, "sup", 0);
  CHECK(net.reachable("host"));
  REQUIRE(net.route_entry("sup", "host").has_value());
  CHECK(net.route_entry("sup", "host")->reachable);

  net.leave("host", 100);
  CHECK(!net.reachable("host"));
  CHECK(!net.route_entry("sup", "host")->reachable);

  net.join(host, "sup", 200);  // re-join restores
  CHECK(net.reachable("host"));

  CHECK(!net.has_peer("stranger"));
  CHECK_THROWS_AS(net.peer("stranger"), Error);
  CHECK_THROWS_AS(net.leave("stranger", 0), Error);
}

TEST_CASE("join requires a live super peer") {
  Network net;
  Peer host = edge_peer("host", "gprs", 600, 5.0);
  net.add_peer(host);
  CHECK_THROWS_AS(net.join(host, "ghost", 0), Error);

  net.add_peer(edge_peer("not-super", "wifi", 20, 500.0));
  CHECK_THROWS_AS(net.join(host, "not-super", 0), Error);
}

TEST_CASE("duplicate and malformed peers are rejected") {
  Network net;
  net.add_peer(super_peer("sup"));
  CHECK_THROWS_AS(net.add_peer(super_peer("sup")), Error);
  CHECK_THROWS_AS(net.add_peer(Peer{"", PeerRole::Edge, {{"x", 1, 1.0, true}}}),
                  Error);
  CHECK_THROWS_AS(net.add_peer(Peer{"p", PeerRole::Edge, {}}), Error);
  CHECK_THROWS_AS(
      net.add_peer(Peer{"p", PeerRole::Edge, {{"x", 1, 0.0, true}}}), Error);
}

TEST_CASE("pipe delivery matches the arithmetic oracle") {
  Network net;
  net.add_peer(super_peer("sup"));        // ethernet 5ms, 1000 B/ms
  Peer host = edge_peer("host", "gprs", 600, 5.0);
  net.add_peer(host);
  net.join(host, "sup", 0);

  // SUPER -> EDGE: one hop on the edge side's interface.
  net.open_pipe("sup", "p.down", "host");
  size_t bytes = 1000;
  SendReceipt r = net.send("p.down", std::string(bytes, 'x'), 0);
  CHECK(r.deliver_at == leg_ms(bytes, 600, 5.0));

  std::vector<Message> got;
  net.set_handler("host", [&](Network&, const Message& m) { got.push_back(m); });
  net.drain();
  REQUIRE(got.size() == 1);
  CHECK(got[0].deliver_at == r.deliver_at);
  CHECK(got[0].payload.size() == bytes);

  // EDGE -> EDGE through the super: edge legs, each on its own interface.
  Peer client = edge_peer("client", "wifi", 20, 500.0);
  net.add_peer(client);
  net.join(client, "sup", net.now());
  net.open_pipe("client", "p.cross", "host");
  int64_t t0 = net.now();
  SendReceipt r2 = net.send("p.cross", std::string(bytes, 'y'), t0);
  CHECK(r2.deliver_at == t0 + leg_ms(bytes, 20, 500.0) + leg_ms(bytes, 600, 5.0));
  CHECK(net.path_cost("client", "host", bytes) ==
        leg_ms(bytes, 20, 500.0) + leg_ms(bytes, 600, 5.0));
}

TEST_CASE("cross-super paths add the super-to-super leg") {
  Network net;
  Peer s1 = super_peer("s1");
  Peer s2{"s2", PeerRole::Super, {{"fiber", 2, 2000.0, true}}};
  net.add_peer(s1);
  net.add_peer(s2);
  Peer a = edge_peer("a", "wifi", 20, 500.0);
  Peer b = edge_peer("b", "gprs", 600, 5.0);
  net.add_peer(a);
  net.add_peer(b);
  net.join(a, "s1", 0);
  net.join(b, "s2", 0);

  size_t bytes = 500;
  // a->s1 on a's wifi, s1->s2 on the sender super's ethernet, s2->b on gprs.
  int64_t expect = leg_ms(bytes, 20, 500.0) + leg_ms(bytes, 5, 1000.0) +
                   leg_ms(bytes, 600, 5.0);
  CHECK(net.path_cost("a", "b", bytes) == expect);

  CHECK(net.resolve_route("s1", "a") == std::vector<std::string>{"a"});
  CHECK(net.resolve_route("s1", "b") == std::vector<std::string>{"s2", "b"});
}

TEST_CASE("pipes preserve FIFO even when a later message is smaller") {
  Network net;
  net.add_peer(super_peer("sup"));
  Peer host = edge_peer("host", "gprs", 600, 5.0);
  net.add_peer(host);
  net.join(host, "sup", 0);
  net.open_pipe("sup", "p", "host");

  SendReceipt big = net.send("p", std::string(100000, 'a'), 0);
  SendReceipt small = net.send("p", "b", 1);
  // Unimpeded the small message would land earlier; FIFO floors it.
  CHECK(small.deliver_at >= big.deliver_at);

  std::vector<size_t> sizes;
  net.set_handler("host",
                  [&](Network&, const Message& m) { sizes.push_back(m.payload.size()); });
  net.drain();
  REQUIRE(sizes.size() == 2);
  CHECK(sizes[0] == 100000);
  CHECK(sizes[1] == 1);
}

TEST_CASE("sends to departed peers fail and are counted") {
  Network net;
  net.add_peer(super_peer("sup"));
  Peer host = edge_peer("host", "gprs", 600, 5.0);
  net.add_peer(host);
  net.join(host, "sup", 0);
  net.open_pipe("sup", "p", "host");

  // Unreachable at send time: refused outright.
  net.leave("host", 10);
  CHECK_THROWS_AS(net.send("p", "x", 10), Error);

  // Reachable at send time, departed before delivery: dropped in flight.
  net.join(host, "sup", 20);
  net.send("p", "x", 20);
  net.leave("host", 21);
  net.drain();
  CHECK(net.sent_count() == 1);
  CHECK(net.delivered_count() == 0);
  CHECK(net.failed_count() == 1);
}

TEST_CASE("message counters balance after a busy run") {
  Network net;
  net.add_peer(super_peer("sup"));
  Peer a = edge_peer("a", "wifi", 20, 500.0);
  Peer b = edge_peer("b", "gprs", 600, 5.0);
  net.add_peer(a);
  net.add_peer(b);
  net.join(a, "sup", 0);
  net.join(b, "sup", 0);
  net.open_pipe("a", "ab", "b");
  net.open_pipe("b", "ba", "a");

  std::mt19937_64 g(11);
  for (int i = 0; i < 40; ++i) {
    net.send(i % 2 ? "ab" : "ba", std::string(1 + g() % 5000, 'z'), net.now());
    if (i == 25) net.leave("b", net.now());
    if (i == 30) net.join(b, "sup", net.now());
    net.advance_clock(net.now() + int64_t(g() % 300));
  }
  net.drain();
  CHECK(net.sent_count() == net.delivered_count() + net.failed_count());
}

TEST_CASE("interface flap changes the selected route cost") {
  Network net;
  net.add_peer(super_peer("sup"));
  Peer dev{"dev",
           PeerRole::Edge,
           {{"gprs", 600, 5.0, true}, {"wifi", 20, 500.0, true}}};
  net.add_peer(dev);
  net.join(dev, "sup", 0);

  size_t bytes = 1000;
  CHECK(net.path_cost("sup", "dev", bytes) == leg_ms(bytes, 20, 500.0));
  net.set_interface_up("dev", "wifi", false);
  CHECK(net.path_cost("sup", "dev", bytes) == leg_ms(bytes, 600, 5.0));
  net.set_interface_up("dev", "wifi", true);
  CHECK(net.path_cost("sup", "dev", bytes) == leg_ms(bytes, 20, 500.0));

  CHECK(net.worst_latency("dev") == 600);
}

TEST_CASE("direct links bypass the overlay") {
  Network net;
  net.add_peer(super_peer("sup"));
  Peer client = edge_peer("client", "wifi", 20, 500.0);
  net.add_peer(client);
  // No join: the client is not an overlay member, yet the link works.
  std::string link = net.open_direct("client", "sup", {"dsl", 30, 100.0, true});

  size_t bytes = 2000;
  SendReceipt r = net.send_direct(link, "client", std::string(bytes, 'q'), 0);
  CHECK(r.deliver_at == leg_ms(bytes, 30, 100.0));

  net.drain();
  CHECK(net.delivered_count() == 1);
  CHECK(net.take_inbox("sup").size() == 1);

  CHECK_THROWS_AS(net.send_direct("link-404", "client", "x", 10), Error);
  CHECK_THROWS_AS(net.send_direct(link, "outsider", "x", 10), Error);
  CHECK_THROWS_AS(net.open_direct("client", "sup", {"bad", 1, 0.0, true}),
                  Error);
}

TEST_CASE("SMS reaches a departed peer at fixed latency") {
  Network net;
  net.add_peer(super_peer("sup"));
  Peer host = edge_peer("host", "gprs", 600, 5.0);
  net.add_peer(host);
  net.join(host, "sup", 0);
  net.leave("host", 50);  // radio off

  SendReceipt r = net.send_sms("host", "WAKE", 100);
  CHECK(r.deliver_at == 100 + kSmsLatencyMs);

  bool got = false;
  net.set_sms_handler("host", [&](Network&, const Message& m) {
    got = true;
    CHECK(m.link == LinkKind::Sms);
    CHECK(m.payload == "WAKE");
  });
  net.drain();
  CHECK(got);

  CHECK_THROWS_AS(net.send_sms("ghost", "x", 0), Error);
  CHECK_THROWS_AS(net.send_sms("host", std::string(kSmsPayloadCap + 1, 'a'), 0),
                  Error);
}

TEST_CASE("pipe endpoint identity is sticky") {
  Network net;
  net.add_peer(super_peer("sup"));
  Peer host = edge_peer("host", "gprs", 600, 5.0);
  net.add_peer(host);
  net.join(host, "sup", 0);

  net.open_pipe("sup", "p", "host");
  net.open_pipe("sup", "p", "host");  // same endpoints: idempotent
  CHECK(net.has_pipe("p"));
  CHECK_THROWS_AS(net.open_pipe("host", "p", "sup"), Error);
  CHECK_THROWS_AS(net.pipe("q"), Error);
  CHECK_THROWS_AS(net.send("q", "x", 0), Error);
}

TEST_CASE("clock is monotonic and timers run before messages") {
  Network net;
  net.add_peer(super_peer("sup"));
  Peer host = edge_peer("host", "wifi", 0, 1000.0);
  net.add_peer(host);
  net.join(host, "sup", 0);
  net.open_pipe("sup", "p", "host");

  std::vector<std::string> order;
  net.set_handler("host",
                  [&](Network&, const Message&) { order.push_back("msg"); });
  net.send("p", std::string(1000, 'x'), 0);  // delivers at 1
  net.schedule(1, [&](Network&) { order.push_back("timer"); });
  net.advance_clock(5);
  REQUIRE(order.size() == 2);
  CHECK(order[0] == "timer");
  CHECK(order[1] == "msg");

  CHECK_THROWS_AS(net.advance_clock(2), Error);
  CHECK(net.now() == 5);
}

TEST_CASE("trace stream reports sends and deliveries") {
  Network net;
  std::vector<std::string> events;
  net.set_trace([&](int64_t, std::string_view ev, std::string_view) {
    events.emplace_back(ev);
  });
  net.add_peer(super_peer("sup"));
  Peer host = edge_peer("host", "gprs", 600, 5.0);
  net.add_peer(host);
  net.join(host, "sup", 0);
  net.open_pipe("sup", "p", "host");
  net.send("p", "hello", 0);
  net.drain();

  CHECK(std::count(events.begin(), events.end(), "join") == 1);
  CHECK(std::count(events.begin(), events.end(), "send") == 1);
  CHECK(std::count(events.begin(), events.end(), "deliver") == 1);
}

TEST_CASE("send observer sees every payload") {
  Network net;
  net.add_peer(super_peer("sup"));
  Peer host = edge_peer("host", "gprs", 600, 5.0);
  net.add_peer(host);
  net.join(host, "sup", 0);
  net.open_pipe("sup", "p", "host");

  size_t seen = 0;
  net.set_send_observer([&](const Message& m) {
    ++seen;
    CHECK(!m.payload.empty());
  });
  net.send("p", "one", 0);
  net.send_sms("host", "two", 0);
  CHECK(seen == 2);
}
