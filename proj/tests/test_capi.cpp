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

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "mwsmf.h"

namespace {

std::string fixture(const std::string& name) {
  return std::string(MWSMF_SCENARIO_DIR) + "/" + name;
}

}  // namespace

TEST_CASE("version and error state") {
  REQUIRE(mwsmf_version() != nullptr);
  CHECK(std::strlen(mwsmf_version()) > 0);
}

TEST_CASE("argument validation") {
  CHECK(mwsmf_scenario_check(nullptr) == MWSMF_ERR_ARGUMENT);
  CHECK(std::strlen(mwsmf_last_error()) > 0);
  CHECK(mwsmf_run_scenario(nullptr, 0, 0, nullptr) == MWSMF_ERR_ARGUMENT);
  mwsmf_run* run = nullptr;
  CHECK(mwsmf_run_scenario(nullptr, 0, 0, &run) == MWSMF_ERR_ARGUMENT);
  CHECK(run == nullptr);
  CHECK(mwsmf_report_from_file(nullptr, nullptr) == MWSMF_ERR_ARGUMENT);
  CHECK(mwsmf_keystore_generate(nullptr, "x", 1024) == MWSMF_ERR_ARGUMENT);
  CHECK(mwsmf_keystore_generate("d", "x", 512) == MWSMF_ERR_ARGUMENT);

  // Null-handle accessors are inert rather than undefined.
  CHECK(mwsmf_run_exit_code(nullptr) != 0);
  CHECK(mwsmf_run_invocations(nullptr) == 0);
  CHECK(mwsmf_run_metrics(nullptr) != nullptr);
  mwsmf_run_free(nullptr);
  mwsmf_string_free(nullptr);
}

TEST_CASE("scenario check distinguishes good from bad") {
  CHECK(mwsmf_scenario_check(fixture("photo-album.scn").c_str()) == MWSMF_OK);
  CHECK(mwsmf_scenario_check("missing-file.scn") == MWSMF_ERR_SCENARIO);
  CHECK(std::strlen(mwsmf_last_error()) > 0);
}

TEST_CASE("run a scenario through the C surface") {
  mwsmf_run* run = nullptr;
  REQUIRE(mwsmf_run_scenario(fixture("photo-album.scn").c_str(), 42, 1, &run) ==
          MWSMF_OK);
  REQUIRE(run != nullptr);

  CHECK(mwsmf_run_exit_code(run) == 0);
  CHECK(mwsmf_run_invocations(run) == 5);
  for (size_t i = 0; i < mwsmf_run_invocations(run); ++i) {
    CHECK(mwsmf_run_invocation_id(run, i) != nullptr);
    CHECK(std::string(mwsmf_run_invocation_status(run, i)) == "ok");
    CHECK(std::string(mwsmf_run_invocation_expected(run, i)) == "ok");
    CHECK(mwsmf_run_invocation_matched(run, i) == 1);
  }
  CHECK(std::string(mwsmf_run_invocation_id(run, 99)).empty());
  CHECK(mwsmf_run_invocation_matched(run, 99) == 0);

  std::string metrics = mwsmf_run_metrics(run);
  std::string report = mwsmf_run_report(run);
  std::string trace = mwsmf_run_trace(run);
  std::string mlog = mwsmf_run_mediation_log(run);
  CHECK(!metrics.empty());
  CHECK(report.find("invocations\t5") != std::string::npos);
  CHECK(trace.find("wake") != std::string::npos);
  CHECK(!mlog.empty());

  CHECK(mwsmf_run_messages_sent(run) > 0);
  CHECK(mwsmf_run_messages_sent(run) ==
        mwsmf_run_messages_delivered(run) + mwsmf_run_messages_failed(run));

  // Determinism through this interface too.
  mwsmf_run* again = nullptr;
  REQUIRE(mwsmf_run_scenario(fixture("photo-album.scn").c_str(), 42, 1,
                             &again) == MWSMF_OK);
  CHECK(metrics == mwsmf_run_metrics(again));
  CHECK(trace == mwsmf_run_trace(again));
  mwsmf_run_free(again);

  // Trace capture is opt-in.
  mwsmf_run* no_trace = nullptr;
  REQUIRE(mwsmf_run_scenario(fixture("photo-album.scn").c_str(), 42, 0,
                             &no_trace) == MWSMF_OK);
  CHECK(std::string(mwsmf_run_trace(no_trace)).empty());
  mwsmf_run_free(no_trace);

  mwsmf_run_free(run);
}

TEST_CASE("assembly failures surface as scenario errors") {
  mwsmf_run* run = nullptr;
  CHECK(mwsmf_run_scenario(fixture("no-super-peer.scn").c_str(), 42, 0, &run) ==
        MWSMF_ERR_SCENARIO);
  CHECK(run == nullptr);
  CHECK(std::string(mwsmf_last_error()).find("NoSuperPeer") !=
        std::string::npos);
}

TEST_CASE("report recomputation from a metric file") {
  mwsmf_run* run = nullptr;
  REQUIRE(mwsmf_run_scenario(fixture("gprs-default.scn").c_str(), 42, 0,
                             &run) == MWSMF_OK);
  std::string metrics = mwsmf_run_metrics(run);
  std::string expected_report = mwsmf_run_report(run);
  mwsmf_run_free(run);

  std::string path = "capi-metrics-test.log";
  {
    std::ofstream out(path, std::ios::binary);
    out << metrics;
  }
  char* text = nullptr;
  REQUIRE(mwsmf_report_from_file(path.c_str(), &text) == MWSMF_OK);
  REQUIRE(text != nullptr);
  CHECK(std::string(text) == expected_report);
  mwsmf_string_free(text);

  // An empty log is a recognizable no-data failure.
  {
    std::ofstream out("capi-empty-test.log", std::ios::binary);
  }
  char* none = nullptr;
  CHECK(mwsmf_report_from_file("capi-empty-test.log", &none) ==
        MWSMF_ERR_NO_DATA);
  CHECK(none == nullptr);

  std::remove(path.c_str());
  std::remove("capi-empty-test.log");
}

TEST_CASE("keystore generation writes both DER files") {
  std::string dir = "capi-keys-test";
  CHECK(mwsmf_keystore_generate(dir.c_str(), "fresh", 1024) == MWSMF_OK);
  CHECK(std::filesystem::exists(dir + "/fresh.der"));
  CHECK(std::filesystem::exists(dir + "/fresh.pub.der"));
  std::filesystem::remove_all(dir);
}
