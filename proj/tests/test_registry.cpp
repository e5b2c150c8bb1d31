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
#include <cstdio>
#include <random>

#include "mwsmf/errors.hpp"
#include "mwsmf/registry.hpp"

using namespace mwsmf;

namespace {

ServiceRecord make_record(const std::string& id) {
  ServiceRecord r;
  r.service_id = id;
  r.name = "album";
  r.keywords = {"photo", "album"};
  r.binding = OverlayBinding{"host1", "pipe." + id};
  r.owner_identity = "host1";
  return r;
}

ModuleAdvertisement make_ad(const std::string& id, int64_t expires) {
  ModuleAdvertisement a;
  a.module_id = id;
  a.service_name = "album";
  a.pipe_id = "pipe." + id;
  a.provider_peer = "host1";
  a.keywords = {"photo"};
  a.expires_at = expires;
  return a;
}

}  // namespace

TEST_CASE("publish and find services") {
  Registry reg;
  reg.publish_service(make_record("svc1"));
  reg.publish_service(make_record("svc2"));
  CHECK(reg.service_count() == 2);
  CHECK(reg.service("svc1").has_value());
  CHECK(!reg.service("ghost").has_value());

  DiscoveryQuery q;
  q.keywords = {"photo"};
  CHECK(reg.find_services(q).size() == 2);
  q.keywords = {"video"};
  CHECK(reg.find_services(q).empty());
}

TEST_CASE("duplicate service ids are refused") {
  Registry reg;
  reg.publish_service(make_record("svc1"));
  CHECK_THROWS_AS(reg.publish_service(make_record("svc1")), Error);
}

TEST_CASE("record validation") {
  ServiceRecord r = make_record("ok");
  r.validate();
  r.service_id.clear();
  CHECK_THROWS_AS(r.validate(), Error);
  r = make_record("ok");
  r.keywords.clear();
  CHECK_THROWS_AS(r.validate(), Error);

  DiscoveryQuery empty;
  CHECK_THROWS_AS(empty.validate(), Error);
  DiscoveryQuery by_ctx;
  by_ctx.context_filters["zone"] = "munich";
  by_ctx.validate();
}

TEST_CASE("advertisement republish replaces and expiry hides") {
  Registry reg;
  reg.publish_advertisement(make_ad("m1", 1000), 0);
  CHECK(reg.advertisement_count() == 1);

  DiscoveryQuery q;
  q.keywords = {"photo"};
  CHECK(reg.discover_modules(q, 500).size() == 1);
  CHECK(reg.discover_modules(q, 1000).size() == 1);  // expiry is inclusive
  // expires_at has passed: hidden from discovery, still stored.
  CHECK(reg.discover_modules(q, 1001).empty());
  CHECK(reg.advertisement_count() == 1);

  q.include_expired = true;
  CHECK(reg.discover_modules(q, 5000).size() == 1);
  q.include_expired = false;

  // Re-publication with the same id replaces the record (fresh expiry).
  reg.publish_advertisement(make_ad("m1", 9000), 2000);
  CHECK(reg.advertisement_count() == 1);
  CHECK(reg.discover_modules(q, 5000).size() == 1);

  CHECK(reg.expire_sweep(9500) == 1);
  CHECK(reg.advertisement_count() == 0);
}

TEST_CASE("context filters require exact values") {
  Registry reg;
  ModuleAdvertisement a = make_ad("m1", 10000);
  a.context_attrs = {{"zone", "munich"}, {"net", "gprs"}};
  reg.publish_advertisement(a, 0);

  DiscoveryQuery q;
  q.context_filters = {{"zone", "munich"}};
  CHECK(reg.discover_modules(q, 0).size() == 1);
  q.context_filters = {{"zone", "munich"}, {"net", "gprs"}};
  CHECK(reg.discover_modules(q, 0).size() == 1);
  q.context_filters = {{"zone", "berlin"}};
  CHECK(reg.discover_modules(q, 0).empty());
  q.context_filters = {{"altitude", "high"}};
  CHECK(reg.discover_modules(q, 0).empty());
  // Keyword and context clauses must both hold.
  q.context_filters = {{"zone", "munich"}};
  q.keywords = {"video"};
  CHECK(reg.discover_modules(q, 0).empty());
}

TEST_CASE("journal line codecs round-trip") {
  ServiceRecord r = make_record("svc%1");
  r.description = "has\ttabs and\nnewlines";
  ServiceRecord back = decode_service_line(encode_service_line(r));
  CHECK(back == r);

  ServiceRecord url = make_record("svc2");
  url.binding = PublicUrl{"host.example", "/album"};
  CHECK(decode_service_line(encode_service_line(url)) == url);

  ModuleAdvertisement a = make_ad("mod1", 777);
  a.context_attrs = {{"zone", "munich"}};
  ModuleAdvertisement aback = decode_advertisement_line(
      encode_advertisement_line(a));
  CHECK(aback == a);
}

TEST_CASE("journal replay restores and supersedes") {
  std::string path = "registry-journal-test.log";
  std::remove(path.c_str());
  {
    Registry reg(path);
    reg.publish_service(make_record("svc1"));
    reg.publish_advertisement(make_ad("m1", 100), 0);
    reg.publish_advertisement(make_ad("m1", 900), 10);  // supersedes
  }
  {
    Registry reg(path);
    CHECK(reg.service_count() == 1);
    CHECK(reg.advertisement_count() == 1);
    CHECK(reg.advertisement("m1")->expires_at == 900);
  }
  std::remove(path.c_str());
}

// ---------------------------------------------------------------------------
// Randomized matching against a straight-line oracle.

namespace {

const std::vector<std::string> kVocab = {"photo", "album", "video", "music",
                                         "map",   "chat",  "mail",  "news"};
const std::vector<std::pair<std::string, std::string>> kAttrs = {
    {"zone", "munich"}, {"zone", "berlin"}, {"net", "gprs"}, {"net", "wifi"}};

std::set<std::string> random_keywords(std::mt19937_64& g, size_t max_n) {
  std::set<std::string> out;
  size_t n = g() % (max_n + 1);
  for (size_t i = 0; i < n; ++i) out.insert(kVocab[g() % kVocab.size()]);
  return out;
}

bool oracle_keywords(const std::set<std::string>& have,
                     const std::set<std::string>& want) {
  if (want.empty()) return true;
  return std::any_of(want.begin(), want.end(),
                     [&](const std::string& k) { return have.count(k) > 0; });
}

bool oracle_context(const std::map<std::string, std::string>& have,
                    const std::map<std::string, std::string>& want) {
  for (const auto& [k, v] : want) {
    auto it = have.find(k);
    if (it == have.end() || it->second != v) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("service matching agrees with the oracle on 600 random pairs") {
  std::mt19937_64 g(20260818);
  for (int i = 0; i < 600; ++i) {
    ServiceRecord r = make_record("svc");
    r.keywords = random_keywords(g, 4);
    if (r.keywords.empty()) r.keywords.insert(kVocab[g() % kVocab.size()]);

    DiscoveryQuery q;
    q.keywords = random_keywords(g, 3);
    if (q.keywords.empty()) q.context_filters["zone"] = "munich";

    // Records carry no context attributes, so any context filter fails.
    bool expect = oracle_keywords(r.keywords, q.keywords) &&
                  oracle_context({}, q.context_filters);
    CAPTURE(i);
    CHECK(matches(r, q) == expect);
  }
}

TEST_CASE("advertisement matching agrees with the oracle on 600 random pairs") {
  std::mt19937_64 g(42424242);
  int expired_seen = 0;
  for (int i = 0; i < 600; ++i) {
    ModuleAdvertisement a = make_ad("m", int64_t(g() % 2000));
    a.keywords = random_keywords(g, 4);
    a.context_attrs.clear();
    size_t n_attrs = g() % 3;
    for (size_t j = 0; j < n_attrs; ++j) {
      const auto& [k, v] = kAttrs[g() % kAttrs.size()];
      a.context_attrs[k] = v;
    }

    DiscoveryQuery q;
    q.keywords = random_keywords(g, 3);
    size_t n_filters = g() % 3;
    for (size_t j = 0; j < n_filters; ++j) {
      const auto& [k, v] = kAttrs[g() % kAttrs.size()];
      q.context_filters[k] = v;
    }
    int64_t now = int64_t(g() % 2000);

    bool expect = a.expires_at >= now &&
                  oracle_keywords(a.keywords, q.keywords) &&
                  oracle_context(a.context_attrs, q.context_filters);
    if (a.expires_at < now) ++expired_seen;
    CAPTURE(i);
    CHECK(matches(a, q, now) == expect);
  }
  CHECK(expired_seen > 50);  // the draw actually exercised expiry
}

TEST_CASE("discovery never returns expired advertisements") {
  std::mt19937_64 g(7);
  Registry reg;
  std::map<std::string, int64_t> expiries;
  for (int i = 0; i < 200; ++i) {
    std::string id = "m" + std::to_string(i);
    int64_t expires = int64_t(g() % 1000);
    ModuleAdvertisement a = make_ad(id, expires);
    a.keywords = {"photo"};
    reg.publish_advertisement(a, 0);
    expiries[id] = expires;
  }
  DiscoveryQuery q;
  q.keywords = {"photo"};
  for (int64_t now : {int64_t(0), int64_t(250), int64_t(500), int64_t(999)}) {
    std::vector<ModuleAdvertisement> found = reg.discover_modules(q, now);
    size_t expect = 0;
    for (const auto& [id, exp] : expiries)
      if (exp >= now) ++expect;
    CHECK(found.size() == expect);
    for (const ModuleAdvertisement& a : found) CHECK(a.expires_at >= now);
  }
}
