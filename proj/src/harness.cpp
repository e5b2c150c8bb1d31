// Copyright 2026 the mwsmf authors. Apache-2.0 license.
//
// Scenario runner: parses .scn files, assembles the simulated deployment,
// drives the workload to quiescence and turns mediation reports into
// per-invocation metrics plus an aggregate report.

#include "mwsmf/harness.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <set>
#include <sstream>
#include <utility>

#include "mwsmf/errors.hpp"
#include "mwsmf/soap.hpp"
#include "mwsmf/util.hpp"
#include "mwsmf/xml.hpp"

namespace mwsmf {

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& msg) {
  throw Error(Err::ScenarioInvalid, where + ": " + msg);
}

int64_t to_i64(const std::string& s, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
    bad(where, "expected integer, got '" + s + "'");
  return v;
}

double to_dbl(const std::string& s, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
    bad(where, "expected number, got '" + s + "'");
  return v;
}

size_t to_size(const std::string& s, const std::string& where) {
  int64_t v = to_i64(s, where);
  if (v < 0) bad(where, "expected non-negative size, got '" + s + "'");
  return static_cast<size_t>(v);
}

std::string chop_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// kind:latency_ms:bandwidth_bytes_per_ms, comma-separated for multi-homing.
std::vector<NetworkInterface> parse_interfaces(const std::string& spec,
                                               const std::string& where) {
  std::vector<NetworkInterface> out;
  for (const std::string& one : split(spec, ',')) {
    std::vector<std::string> f = split(one, ':');
    if (f.size() != 3) bad(where, "interface must be kind:latency:bw");
    NetworkInterface ni;
    ni.kind = f[0];
    ni.latency_ms = to_i64(f[1], where);
    ni.bandwidth_bytes_per_ms = to_dbl(f[2], where);
    ni.up = true;
    if (ni.kind.empty() || ni.latency_ms < 0 ||
        !(ni.bandwidth_bytes_per_ms > 0))
      bad(where, "interface needs a kind, latency >= 0 and bandwidth > 0");
    out.push_back(std::move(ni));
  }
  if (out.empty()) bad(where, "at least one interface required");
  return out;
}

NetworkInterface parse_one_interface(const std::string& spec,
                                     const std::string& where) {
  std::vector<NetworkInterface> v = parse_interfaces(spec, where);
  if (v.size() != 1) bad(where, "exactly one interface expected here");
  return v[0];
}

ServiceBinding parse_binding(const std::string& spec,
                             const std::string& where) {
  std::vector<std::string> f = split(spec, ':');
  if (f.size() >= 2 && f[0] == "overlay") {
    OverlayBinding b;
    b.pipe_id = join(std::vector<std::string>(f.begin() + 1, f.end()), ':');
    if (b.pipe_id.empty()) bad(where, "overlay binding needs a pipe id");
    return b;
  }
  if (f.size() >= 3 && f[0] == "url") {
    PublicUrl u;
    u.address = f[1];
    u.path = join(std::vector<std::string>(f.begin() + 2, f.end()), ':');
    if (u.address.empty() || u.path.empty() || u.path[0] != '/')
      bad(where, "url binding needs address and /path");
    return u;
  }
  bad(where, "binding must be overlay:<pipe> or url:<address>:<path>");
}

void apply_option(ScenarioOptions& o, const std::string& key,
                  const std::string& value, const std::string& where) {
  if (key == "boot_delay_ms") o.boot_delay_ms = to_i64(value, where);
  else if (key == "ad_ttl_ms") o.ad_ttl_ms = to_i64(value, where);
  else if (key == "skew_ms") o.skew_ms = to_i64(value, where);
  else if (key == "lifetime_ms") o.lifetime_ms = to_i64(value, where);
  else if (key == "auth_stage_ms") o.auth_stage_ms = to_i64(value, where);
  else if (key == "transform_stage_ms") o.transform_stage_ms = to_i64(value, where);
  else if (key == "route_stage_ms") o.route_stage_ms = to_i64(value, where);
  else if (key == "response_timeout_ms") o.response_timeout_ms = to_i64(value, where);
  else if (key == "host_base_ms") o.host_base_ms = to_dbl(value, where);
  else if (key == "host_per_byte_ms") o.host_per_byte_ms = to_dbl(value, where);
  else if (key == "budget_bytes") o.budget_bytes = to_size(value, where);
  else if (key == "core_bytes") o.core_bytes = to_size(value, where);
  else if (key == "mediator") o.mediator_id = value;
  else if (key == "photos") o.photos_dir = value;
  else bad(where, "unknown option '" + key + "'");
}

// GetPhoto:<id> | ListPhotos | Xml:<element literal>; pad appends a filler
// child so payload size can be swept without changing the operation.
XmlElement make_operation_body(const WorkItem& item) {
  XmlElement body;
  if (item.operation.rfind("Xml:", 0) == 0) {
    body = parse_element(item.operation.substr(4));
  } else if (item.operation.rfind("GetPhoto:", 0) == 0) {
    body = XmlElement(QName("GetPhoto"));
    body.child(XmlElement(QName("id"), item.operation.substr(9)));
  } else if (item.operation == "ListPhotos") {
    body = XmlElement(QName("ListPhotos"));
  } else {
    throw Error(Err::ScenarioInvalid,
                "unknown operation '" + item.operation + "'");
  }
  if (item.pad_bytes > 0)
    body.child(XmlElement(QName("Pad"), std::string(item.pad_bytes, 'x')));
  return body;
}

std::string expected_status(const std::string& expect) {
  if (expect == "ok") return "ok";
  if (expect.rfind("fault:", 0) == 0 && expect.size() > 6)
    return expect.substr(6);
  throw Error(Err::ScenarioInvalid,
              "expectation must be ok or fault:<code>, got '" + expect + "'");
}

}  // namespace

std::string Scenario::resolve(const std::string& relative) const {
  std::filesystem::path p(relative);
  if (p.is_absolute()) return relative;
  return (std::filesystem::path(dir) / p).lexically_normal().string();
}

Scenario Scenario::load(const std::string& path) {
  std::string raw;
  try {
    raw = read_file(path);
  } catch (const Error& e) {
    throw Error(Err::ScenarioInvalid, std::string(e.what()));
  }

  Scenario sc;
  sc.dir = std::filesystem::path(path).parent_path().string();
  if (sc.dir.empty()) sc.dir = ".";

  static const std::set<std::string> kSections{
      "options", "keystore", "topology", "hosts",
      "services", "rules",    "profiles", "workload"};

  std::string section;
  bool have_keystore = false;
  size_t line_no = 0;
  for (const std::string& entry : split(raw, '\n')) {
    ++line_no;
    const std::string line = chop_cr(entry);
    const std::string where = path + ":" + std::to_string(line_no);
    if (line.empty() || line[0] == '#') continue;

    if (line.front() == '[') {
      if (line.back() != ']') bad(where, "unterminated section header");
      section = line.substr(1, line.size() - 2);
      if (!kSections.count(section)) bad(where, "unknown section '" + section + "'");
      continue;
    }
    if (section.empty()) bad(where, "content before any [section]");

    const std::vector<std::string> f = split(line, '\t');

    if (section == "options") {
      if (f.size() != 2) bad(where, "options take 'key<TAB>value'");
      apply_option(sc.options, f[0], f[1], where);

    } else if (section == "keystore") {
      if (f.size() != 2 || f[0] != "dir") bad(where, "expected 'dir<TAB>path'");
      sc.keystore_dir = f[1];
      have_keystore = true;

    } else if (section == "topology") {
      if (f[0] == "peer") {
        if (f.size() != 4) bad(where, "peer lines: peer id EDGE|SUPER ifaces");
        Peer p;
        p.id = f[1];
        if (f[2] == "SUPER") p.role = PeerRole::Super;
        else if (f[2] == "EDGE") p.role = PeerRole::Edge;
        else bad(where, "role must be EDGE or SUPER");
        p.interfaces = parse_interfaces(f[3], where);
        sc.peers.push_back(std::move(p));
      } else if (f[0] == "client") {
        if (f.size() != 4) bad(where, "client lines: client id credential iface");
        ClientDecl c;
        c.id = f[1];
        c.credential = f[2];
        c.link = parse_one_interface(f[3], where);
        sc.clients.push_back(std::move(c));
      } else if (f[0] == "public") {
        if (f.size() != 4) bad(where, "public lines: public address peer iface");
        PublicDecl p;
        p.address = f[1];
        p.peer_id = f[2];
        p.link = parse_one_interface(f[3], where);
        sc.publics.push_back(std::move(p));
      } else {
        bad(where, "topology lines start with peer, client or public");
      }

    } else if (section == "hosts") {
      if (f.size() != 5 || f[0] != "host")
        bad(where, "host lines: host id super ACTIVE|SLEEPING wakeable");
      HostDecl h;
      h.id = f[1];
      h.super_id = f[2];
      if (f[3] == "SLEEPING") h.sleeping = true;
      else if (f[3] != "ACTIVE") bad(where, "state must be ACTIVE or SLEEPING");
      if (f[4] == "1") h.wakeable = true;
      else if (f[4] != "0") bad(where, "wakeable must be 0 or 1");
      sc.hosts.push_back(std::move(h));

    } else if (section == "services") {
      if (f.size() != 9 || f[0] != "svc")
        bad(where,
            "svc lines: svc id name host path binding keywords footprint desc");
      ServiceDecl d;
      d.record.service_id = f[1];
      d.record.name = f[2];
      d.record.owner_identity = f[3];
      d.path = f[4];
      if (d.path.empty() || d.path[0] != '/') bad(where, "path must start with /");
      d.record.binding = parse_binding(f[5], where);
      if (auto* ob = std::get_if<OverlayBinding>(&d.record.binding))
        ob->peer_id = d.record.owner_identity;
      if (f[6] != "-")
        for (const std::string& kw : split(f[6], ','))
          if (!kw.empty()) d.record.keywords.insert(kw);
      d.footprint_bytes = to_size(f[7], where);
      if (f[8] != "-") d.record.description = f[8];
      sc.services.push_back(std::move(d));

    } else if (section == "rules") {
      if (f[0] == "file") {
        if (f.size() != 2) bad(where, "rules file line: file path");
        for (RoutingRule& r : load_rules_file(sc.resolve(f[1])))
          sc.rules.push_back(std::move(r));
      } else if (f[0] == "rule") {
        if (f.size() != 6)
          bad(where, "rule lines: rule priority id match-path value|* dest");
        RoutingRule r;
        r.priority = static_cast<int>(to_i64(f[1], where));
        r.rule_id = f[2];
        r.match_path = f[3];
        if (f[4] != "*") r.match_value = f[4];
        r.destination = f[5];
        sc.rules.push_back(std::move(r));
      } else {
        bad(where, "rules lines start with rule or file");
      }

    } else if (section == "profiles") {
      if (f[0] == "file") {
        if (f.size() != 2) bad(where, "profiles file line: file path");
        for (ClientProfile& p : load_profiles_file(sc.resolve(f[1])))
          sc.profiles.push_back(std::move(p));
      } else if (f[0] == "profile") {
        if (f.size() != 5)
          bad(where, "profile lines: profile identity digest capability attrs");
        ClientProfile p;
        p.identity = f[1];
        p.credential_digest = lowercase(f[2]);
        if (p.credential_digest.size() != 64)
          bad(where, "credential digest must be 64 hex chars");
        p.capability = SecurityProfile::by_name(f[3]);
        if (f[4] != "-" && !f[4].empty()) {
          for (const std::string& attr : split(f[4], ';')) {
            size_t eq = attr.find('=');
            if (eq == std::string::npos || eq == 0)
              bad(where, "attributes are ;-separated k=v pairs");
            std::string k = attr.substr(0, eq);
            std::string v = attr.substr(eq + 1);
            if (k == "allow") {
              for (const std::string& s : split(v, ','))
                if (!s.empty()) p.allowed_services.push_back(s);
            } else if (k.rfind("ctx.", 0) == 0) {
              p.context[k.substr(4)] = v;
            } else {
              p.personalization[k] = v;
            }
          }
        }
        sc.profiles.push_back(std::move(p));
      } else {
        bad(where, "profiles lines start with profile or file");
      }

    } else if (section == "workload") {
      if (f.size() != 7 || f[0] != "inv")
        bad(where, "inv lines: inv at client service op pad expect");
      WorkItem w;
      w.at_ms = to_i64(f[1], where);
      if (w.at_ms < 0) bad(where, "time must be >= 0");
      w.client = f[2];
      w.service = f[3];
      w.operation = f[4];
      w.pad_bytes = f[5] == "-" ? 0 : to_size(f[5], where);
      w.expect = f[6];
      sc.workload.push_back(std::move(w));
    }
  }

  if (!have_keystore)
    throw Error(Err::ScenarioInvalid, path + ": missing [keystore] dir");
  return sc;
}

void Scenario::validate() const {
  auto fail = [](const std::string& msg) {
    throw Error(Err::ScenarioInvalid, msg);
  };

  const std::string ks_dir = resolve(keystore_dir);
  if (!std::filesystem::is_directory(ks_dir))
    fail("keystore directory missing: " + ks_dir);
  Keystore store(ks_dir);

  std::map<std::string, const Peer*> peer_by_id;
  std::vector<std::string> supers;
  for (const Peer& p : peers) {
    if (p.id.empty()) fail("peer with empty id");
    if (!peer_by_id.emplace(p.id, &p).second) fail("duplicate peer " + p.id);
    if (p.role == PeerRole::Super) supers.push_back(p.id);
  }

  std::string med = options.mediator_id;
  if (med.empty()) {
    if (supers.size() != 1)
      fail("mediator ambiguous: declare exactly one SUPER peer or set the "
           "mediator option");
    med = supers[0];
  } else {
    auto it = peer_by_id.find(med);
    if (it == peer_by_id.end() || it->second->role != PeerRole::Super)
      fail("mediator '" + med + "' is not a declared SUPER peer");
  }
  if (!store.has(med) || !store.key(med).has_private())
    fail("missing private key for mediator " + med);

  std::set<std::string> host_ids;
  for (const HostDecl& h : hosts) {
    auto it = peer_by_id.find(h.id);
    if (it == peer_by_id.end()) fail("host " + h.id + " is not a declared peer");
    if (it->second->role != PeerRole::Edge)
      fail("host " + h.id + " must be an EDGE peer");
    if (!host_ids.insert(h.id).second) fail("duplicate host " + h.id);
    if (h.super_id.empty()) fail("host " + h.id + " needs a super peer id");
    if (!store.has(h.id) || !store.key(h.id).has_private())
      fail("missing private key for host " + h.id);
  }

  std::set<std::string> client_ids;
  for (const ClientDecl& c : clients) {
    if (c.id.empty()) fail("client with empty id");
    if (!client_ids.insert(c.id).second) fail("duplicate client " + c.id);
    if (peer_by_id.count(c.id)) fail("client " + c.id + " clashes with a peer");
    if (!store.has(c.id) || !store.key(c.id).has_private())
      fail("missing private key for client " + c.id);
  }

  std::set<std::string> service_ids;
  for (const ServiceDecl& s : services) {
    try {
      s.record.validate();
    } catch (const Error& e) {
      fail("service " + s.record.service_id + ": " + e.what());
    }
    if (!service_ids.insert(s.record.service_id).second)
      fail("duplicate service " + s.record.service_id);
    if (!host_ids.count(s.record.owner_identity))
      fail("service " + s.record.service_id + " owner " +
           s.record.owner_identity + " is not a declared host");
    if (s.footprint_bytes == 0)
      fail("service " + s.record.service_id + " needs a footprint");
  }

  for (const PublicDecl& p : publics) {
    if (p.address.empty()) fail("public mapping with empty address");
    if (!host_ids.count(p.peer_id))
      fail("public address " + p.address + " maps to unknown host " + p.peer_id);
  }

  for (const RoutingRule& r : rules) {
    if (r.rule_id.empty() || r.match_path.empty())
      fail("routing rule needs id and match path");
    if (!service_ids.count(r.destination))
      fail("rule " + r.rule_id + " routes to unknown service " + r.destination);
  }

  std::set<std::string> profile_ids;
  for (const ClientProfile& p : profiles)
    if (!profile_ids.insert(p.identity).second)
      fail("duplicate profile " + p.identity);

  int64_t last_at = 0;
  for (size_t i = 0; i < workload.size(); ++i) {
    const WorkItem& w = workload[i];
    const std::string tag = "workload item " + std::to_string(i);
    if (w.at_ms < last_at) fail(tag + ": times must be non-decreasing");
    last_at = w.at_ms;
    if (!client_ids.count(w.client)) fail(tag + ": unknown client " + w.client);
    if (w.service != "-" && !service_ids.count(w.service))
      fail(tag + ": unknown service " + w.service);
    try {
      make_operation_body(w);
      std::string st = expected_status(w.expect);
      if (st == "ok" && w.service == "-")
        fail(tag + ": ok expectation needs a target service");
    } catch (const Error& e) {
      if (e.code() != Err::ScenarioInvalid) throw;
      fail(tag + ": " + e.what());
    }
  }
}

std::string InvocationMetric::to_line() const {
  auto field = [](const std::string& s) {
    return s.empty() ? std::string("-") : percent_encode(s);
  };
  std::string stage_text;
  for (const auto& [k, v] : stages) {
    if (!stage_text.empty()) stage_text += ';';
    stage_text += k + "=" + std::to_string(v);
  }
  if (stage_text.empty()) stage_text = "-";

  std::ostringstream os;
  os << field(message_id) << '\t' << total_ms << '\t' << processing_ms << '\t'
     << transmission_ms << '\t' << mediation_ms << '\t'
     << fmt6(processing_fraction) << '\t' << field(status) << '\t'
     << field(destination) << '\t' << (woke_host ? 1 : 0) << '\t'
     << request_bytes << '\t' << response_bytes << '\t' << stage_text;
  return os.str();
}

InvocationMetric InvocationMetric::from_line(std::string_view line,
                                             const std::string& where) {
  const std::vector<std::string> f = split(line, '\t');
  if (f.size() != 12)
    bad(where, "metric lines carry 12 tab-separated fields, got " +
                   std::to_string(f.size()));
  auto field = [](const std::string& s) {
    return s == "-" ? std::string() : percent_decode(s);
  };
  InvocationMetric m;
  m.message_id = field(f[0]);
  m.total_ms = to_i64(f[1], where);
  m.processing_ms = to_i64(f[2], where);
  m.transmission_ms = to_i64(f[3], where);
  m.mediation_ms = to_i64(f[4], where);
  m.processing_fraction = to_dbl(f[5], where);
  m.status = field(f[6]);
  m.destination = field(f[7]);
  m.woke_host = f[8] == "1";
  m.request_bytes = to_size(f[9], where);
  m.response_bytes = to_size(f[10], where);
  if (f[11] != "-") {
    for (const std::string& kv : split(f[11], ';')) {
      size_t eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) bad(where, "bad stage entry");
      m.stages[kv.substr(0, eq)] = to_i64(kv.substr(eq + 1), where);
    }
  }
  return m;
}

std::vector<InvocationMetric> load_metrics_file(const std::string& path) {
  std::string raw = read_file(path);
  std::vector<InvocationMetric> out;
  size_t line_no = 0;
  for (const std::string& entry : split(raw, '\n')) {
    ++line_no;
    const std::string line = chop_cr(entry);
    if (line.empty() || line[0] == '#') continue;
    out.push_back(InvocationMetric::from_line(
        line, path + ":" + std::to_string(line_no)));
  }
  return out;
}

Aggregate measure_invocation(const std::vector<InvocationMetric>& metrics) {
  if (metrics.empty())
    throw Error(Err::NoData, "no invocations to aggregate");
  Aggregate a;
  a.count = metrics.size();
  a.min_fraction = metrics[0].processing_fraction;
  a.max_fraction = metrics[0].processing_fraction;
  double sum_fraction = 0, sum_total = 0, sum_proc = 0, sum_tx = 0, sum_med = 0;
  std::map<std::string, double> stage_sum;
  for (const InvocationMetric& m : metrics) {
    if (m.status == "ok") ++a.ok_count;
    sum_fraction += m.processing_fraction;
    sum_total += static_cast<double>(m.total_ms);
    sum_proc += static_cast<double>(m.processing_ms);
    sum_tx += static_cast<double>(m.transmission_ms);
    sum_med += static_cast<double>(m.mediation_ms);
    a.min_fraction = std::min(a.min_fraction, m.processing_fraction);
    a.max_fraction = std::max(a.max_fraction, m.processing_fraction);
    for (const auto& [k, v] : m.stages) stage_sum[k] += static_cast<double>(v);
  }
  const double n = static_cast<double>(a.count);
  a.mean_fraction = sum_fraction / n;
  a.mean_total_ms = sum_total / n;
  a.mean_processing_ms = sum_proc / n;
  a.mean_transmission_ms = sum_tx / n;
  a.mean_mediation_ms = sum_med / n;
  for (const auto& [k, v] : stage_sum) a.stage_mean_ms[k] = v / n;
  return a;
}

std::string format_report(const Aggregate& a) {
  std::ostringstream os;
  os << "invocations\t" << a.count << '\n';
  os << "ok\t" << a.ok_count << '\n';
  os << "processing_fraction_mean\t" << fmt6(a.mean_fraction) << '\n';
  os << "processing_fraction_min\t" << fmt6(a.min_fraction) << '\n';
  os << "processing_fraction_max\t" << fmt6(a.max_fraction) << '\n';
  os << "mean_total_ms\t" << fmt6(a.mean_total_ms) << '\n';
  os << "mean_processing_ms\t" << fmt6(a.mean_processing_ms) << '\n';
  os << "mean_transmission_ms\t" << fmt6(a.mean_transmission_ms) << '\n';
  os << "mean_mediation_ms\t" << fmt6(a.mean_mediation_ms) << '\n';
  for (const auto& [k, v] : a.stage_mean_ms)
    os << "stage_mean_ms\t" << k << '\t' << fmt6(v) << '\n';
  return os.str();
}

namespace {

struct LiveClient {
  ClientDecl decl;
  KeyMaterial keys;
  SecurityProfile capability = SecurityProfile::mobile();
  std::string link_id;
  Rng rng{0};
};

struct LiveInvocation {
  std::string mid;
  int64_t sent_at = 0;
  bool done = false;
  std::string status;
  std::string body_canonical;
  int64_t arrival_at = 0;
  int64_t device_ms = 0;
};

}  // namespace

RunResult run_scenario(const std::string& path, uint64_t seed,
                       bool capture_trace) {
  Scenario sc = Scenario::load(path);
  sc.validate();

  RunResult out;
  Network net;
  std::string trace;
  net.set_trace([&trace](int64_t at, std::string_view event,
                         std::string_view fields) {
    trace += std::to_string(at);
    trace += '\t';
    trace.append(event);
    trace += '\t';
    trace.append(fields);
    trace += '\n';
  });

  Registry registry;
  Keystore keystore(sc.resolve(sc.keystore_dir));
  Rng master(seed);

  std::unique_ptr<Mediator> mediator;
  std::vector<std::unique_ptr<MobileHost>> hosts;
  std::vector<LiveClient> clients;
  std::map<std::string, size_t> client_index;
  std::string mediator_id;

  // Assembly failures (bad keys, unreachable supers, budget overruns) are
  // scenario problems, and carry the underlying error name for diagnosis.
  try {
    mediator_id = sc.options.mediator_id;
    if (mediator_id.empty()) {
      for (const Peer& p : sc.peers)
        if (p.role == PeerRole::Super) mediator_id = p.id;
    }
    const Peer* med_peer = nullptr;
    for (const Peer& p : sc.peers) {
      net.add_peer(p);
      if (p.id == mediator_id) med_peer = &p;
    }
    if (!med_peer)
      throw Error(Err::ScenarioInvalid, "mediator peer missing");

    MediatorConfig mc;
    mc.auth_stage_ms = sc.options.auth_stage_ms;
    mc.transform_stage_ms = sc.options.transform_stage_ms;
    mc.route_stage_ms = sc.options.route_stage_ms;
    mc.response_timeout_ms = sc.options.response_timeout_ms;
    mc.timestamp_skew_ms = sc.options.skew_ms;
    mc.timestamp_lifetime_ms = sc.options.lifetime_ms;
    mc.boot_delay_ms = sc.options.boot_delay_ms;
    mediator = std::make_unique<Mediator>(
        net, registry, keystore, *med_peer,
        keystore.material(mediator_id, SecurityProfile::full()), mc,
        Rng(master.next_u64()));
    for (const RoutingRule& r : sc.rules) mediator->add_rule(r);
    for (const ClientProfile& p : sc.profiles) mediator->add_profile(p);

    HostConfig hc;
    hc.budget_bytes = sc.options.budget_bytes;
    hc.core_bytes = sc.options.core_bytes;
    hc.boot_delay_ms = sc.options.boot_delay_ms;
    hc.ad_ttl_ms = sc.options.ad_ttl_ms;
    hc.timestamp_skew_ms = sc.options.skew_ms;
    hc.timestamp_lifetime_ms = sc.options.lifetime_ms;
    hc.cost.base_ms = sc.options.host_base_ms;
    hc.cost.per_byte_ms = sc.options.host_per_byte_ms;

    KeyMaterial gateway;
    gateway.identity = mediator_id;
    gateway.rsa = keystore.public_key(mediator_id);
    gateway.profile = SecurityProfile::full();

    std::map<std::string, MobileHost*> host_by_id;
    for (const HostDecl& hd : sc.hosts) {
      const Peer* hp = nullptr;
      for (const Peer& p : sc.peers)
        if (p.id == hd.id) hp = &p;
      hosts.push_back(std::make_unique<MobileHost>(
          net, registry, *hp, hd.super_id,
          keystore.material(hd.id, SecurityProfile::mobile()), gateway, hc,
          Rng(master.next_u64())));
      host_by_id[hd.id] = hosts.back().get();
      if (hd.wakeable) mediator->register_wakeable_host(hd.id);
    }

    auto store = std::make_shared<PhotoStore>();
    const std::string photos = sc.resolve(sc.options.photos_dir);
    if (std::filesystem::is_directory(photos))
      *store = PhotoStore::load(photos);

    // Several records may expose one deployed service under different
    // bindings (overlay and public URL); the host deploys it once, so
    // list the overlay-bound record first for its pipe to be the one
    // advertised.
    std::set<std::string> deployed;
    for (const ServiceDecl& sd : sc.services) {
      registry.publish_service(sd.record);
      if (!deployed.insert(sd.record.owner_identity + "|" + sd.path).second)
        continue;
      ModuleAdvertisement adv;
      adv.module_id = sd.record.service_id + ".mod";
      adv.service_name = sd.record.name;
      if (const auto* ob = std::get_if<OverlayBinding>(&sd.record.binding))
        adv.pipe_id = ob->pipe_id;
      else
        adv.pipe_id = "pipe." + sd.record.service_id;
      adv.provider_peer = sd.record.owner_identity;
      adv.keywords = sd.record.keywords;
      host_by_id.at(sd.record.owner_identity)
          ->deploy_service(make_photo_album_service(
              sd.path, store, std::move(adv), sd.footprint_bytes));
    }

    for (const PublicDecl& pd : sc.publics)
      mediator->register_public_address(pd.address, pd.peer_id, pd.link);

    for (const ClientDecl& cd : sc.clients) {
      LiveClient c;
      c.decl = cd;
      c.rng = Rng(master.next_u64());
      const ClientProfile* pr = mediator->profile(cd.id);
      c.capability = pr ? pr->capability : SecurityProfile::mobile();
      c.keys = keystore.material(cd.id, c.capability);
      c.link_id = mediator->connect_client(cd.id, cd.link);
      client_index[cd.id] = clients.size();
      clients.push_back(std::move(c));
    }

    for (const HostDecl& hd : sc.hosts) {
      MobileHost* h = host_by_id.at(hd.id);
      h->power_on(0);
      if (hd.sleeping) h->sleep(0);
    }
  } catch (const Error& e) {
    if (e.code() == Err::ScenarioInvalid) throw;
    throw Error(Err::ScenarioInvalid,
                std::string("assembly failed: ") + e.what());
  }

  KeyMaterial mediator_public;
  mediator_public.identity = mediator_id;
  mediator_public.rsa = keystore.public_key(mediator_id);
  mediator_public.profile = SecurityProfile::full();

  std::vector<LiveInvocation> live(sc.workload.size());
  std::map<std::string, size_t> by_mid;
  for (size_t i = 0; i < sc.workload.size(); ++i) {
    live[i].mid = "m" + std::to_string(i);
    by_mid[live[i].mid] = i;
  }

  // Each client correlates replies by message id and opens secured replies
  // with the mediation gateway's public key; unsecured fault frames (the
  // anti-enumeration path) are accepted as-is.
  for (LiveClient& lc : clients) {
    LiveClient* c = &lc;
    net.set_handler(c->decl.id, [&, c](Network&, const Message& msg) {
      const int64_t at = msg.deliver_at;
      ResponseFrame frame;
      SoapEnvelope env;
      try {
        frame = ResponseFrame::parse(msg.payload);
        env = parse_envelope(frame.soap);
      } catch (const Error&) {
        return;
      }
      auto it = by_mid.find(env.message_id());
      if (it == by_mid.end() || live[it->second].done) return;
      LiveInvocation& inv = live[it->second];

      std::string status;
      std::string body;
      int64_t device = 0;
      if (const XmlElement* pm = env.header("ProcessingMs")) {
        try {
          device = to_i64(pm->text_content(), "ProcessingMs");
        } catch (const Error&) {
          device = 0;
        }
      }
      try {
        OpenResult opened = open_inbound(env, c->keys, mediator_public.rsa,
                                         at, sc.options.skew_ms);
        if (!opened.verified || !opened.fresh) {
          status = "bad-signature";
        } else if (is_fault(opened.env)) {
          status = fault_code(opened.env);
        } else {
          status = "ok";
          body = canonicalize(opened.env.body);
        }
      } catch (const Error& e) {
        if (e.code() == Err::NoSignaturePresent && is_fault(env)) {
          status = fault_code(env);
        } else {
          status = "bad-response";
        }
      }
      inv.done = true;
      inv.status = status;
      inv.body_canonical = body;
      inv.arrival_at = at;
      inv.device_ms = device;
    });
  }

  for (size_t i = 0; i < sc.workload.size(); ++i) {
    const WorkItem& w = sc.workload[i];
    net.schedule(w.at_ms, [&, i](Network& n) {
      const WorkItem& item = sc.workload[i];
      LiveClient& c = clients[client_index.at(item.client)];
      LiveInvocation& inv = live[i];
      inv.sent_at = n.now();
      SoapEnvelope env;
      env.body = make_operation_body(item);
      env.set_message_id(inv.mid);
      SoapEnvelope secured =
          secure_outbound(env, c.keys, mediator_public, c.capability, n.now(),
                          sc.options.lifetime_ms, c.rng);
      // The shared-secret credential rides outside the signature so the
      // gateway can check it before any signature work.
      SecurityHeader h = SecurityHeader::read(secured);
      h.credential = c.decl.credential;
      h.write(secured);
      RequestFrame rf;
      rf.path = "/ws";
      rf.soap = serialize_envelope(secured);
      n.send_direct(c.link_id, c.decl.id, rf.to_bytes(), n.now());
    });
  }

  net.drain();

  std::map<std::string, const MediationReport*> report_by_mid;
  for (const MediationReport& r : mediator->reports())
    if (!r.message_id.empty()) report_by_mid.emplace(r.message_id, &r);

  bool all_matched = true;
  for (size_t i = 0; i < sc.workload.size(); ++i) {
    const WorkItem& w = sc.workload[i];
    const LiveInvocation& inv = live[i];
    const MediationReport* r = nullptr;
    if (auto it = report_by_mid.find(inv.mid); it != report_by_mid.end())
      r = it->second;

    InvocationOutcome oc;
    oc.index = i;
    oc.item = w;
    oc.message_id = inv.mid;
    oc.status = inv.done ? inv.status : "no-response";
    oc.expected = expected_status(w.expect);
    oc.body_canonical = inv.body_canonical;
    oc.matched = oc.status == oc.expected;
    if (oc.expected == "ok" && oc.matched)
      oc.matched = r != nullptr && r->destination == w.service;
    all_matched = all_matched && oc.matched;

    InvocationMetric m;
    m.message_id = inv.mid;
    m.status = oc.status;
    if (r) {
      m.destination = r->destination;
      m.woke_host = r->woke_host;
      m.request_bytes = r->request_bytes;
      m.response_bytes = r->response_bytes;
      m.stages = r->timings;
      m.mediation_ms = r->mediation_ms();
      m.processing_ms = r->device_ms;
    }
    if (inv.done) {
      m.total_ms = inv.arrival_at - inv.sent_at;
      int64_t tx = 0;
      if (r) {
        tx += r->received_at - inv.sent_at;
        if (r->response_at > 0)
          tx += r->response_at - r->forwarded_at - r->device_ms;
        tx += inv.arrival_at - r->replied_at;
      } else {
        tx = m.total_ms;
      }
      m.transmission_ms = tx;
      if (m.total_ms != m.processing_ms + m.transmission_ms + m.mediation_ms)
        throw Error(Err::Internal,
                    "time accounting identity violated for " + inv.mid);
      if (m.total_ms > 0)
        m.processing_fraction = static_cast<double>(m.processing_ms) /
                                static_cast<double>(m.total_ms);
    }
    out.metrics.push_back(std::move(m));
    out.outcomes.push_back(std::move(oc));
  }

  out.reports = mediator->reports();
  for (const InvocationMetric& m : out.metrics) {
    out.metrics_text += m.to_line();
    out.metrics_text += '\n';
  }
  out.report_text = out.metrics.empty()
                        ? "invocations\t0\n"
                        : format_report(measure_invocation(out.metrics));
  if (capture_trace) out.trace_text = trace;
  out.messages_sent = net.sent_count();
  out.messages_delivered = net.delivered_count();
  out.messages_failed = net.failed_count();
  out.exit_code = all_matched ? kExitOk : kExitInvocationFailures;
  return out;
}

}  // namespace mwsmf
