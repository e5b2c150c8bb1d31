// Copyright 2026 the mwsmf authors. Apache-2.0 license.
//
// C binding over the simulator core. Exceptions stop at this boundary:
// every entry point catches, records a thread-local message and returns
// a status code.

#include "mwsmf.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <string>

#include "mwsmf/errors.hpp"
#include "mwsmf/harness.hpp"
#include "mwsmf/wssec.hpp"

struct mwsmf_run {
  mwsmf::RunResult result;
  std::string mediation_text;
};

namespace {

constexpr const char* kVersion = "1.0.0";

thread_local std::string t_last_error;

int fail(int code, const std::string& message) {
  t_last_error = message;
  return code;
}

int fail_error(const mwsmf::Error& e) {
  using mwsmf::Err;
  switch (e.code()) {
    case Err::ScenarioInvalid:
      return fail(MWSMF_ERR_SCENARIO, e.what());
    case Err::NoData:
      return fail(MWSMF_ERR_NO_DATA, e.what());
    case Err::IoError:
      return fail(MWSMF_ERR_IO, e.what());
    default:
      return fail(MWSMF_ERR_INTERNAL, e.what());
  }
}

int fail_unknown(const std::exception& e) {
  return fail(MWSMF_ERR_INTERNAL, e.what());
}

const mwsmf::InvocationOutcome* outcome_at(const mwsmf_run* run, size_t i) {
  if (!run || i >= run->result.outcomes.size()) return nullptr;
  return &run->result.outcomes[i];
}

}  // namespace

extern "C" {

const char* mwsmf_version(void) { return kVersion; }

const char* mwsmf_last_error(void) { return t_last_error.c_str(); }

int mwsmf_scenario_check(const char* scenario_path) {
  if (!scenario_path) return fail(MWSMF_ERR_ARGUMENT, "scenario_path is null");
  try {
    mwsmf::Scenario::load(scenario_path).validate();
    t_last_error.clear();
    return MWSMF_OK;
  } catch (const mwsmf::Error& e) {
    return fail_error(e);
  } catch (const std::exception& e) {
    return fail_unknown(e);
  }
}

int mwsmf_run_scenario(const char* scenario_path, uint64_t seed,
                       int capture_trace, mwsmf_run** out) {
  if (!scenario_path || !out)
    return fail(MWSMF_ERR_ARGUMENT, "scenario_path and out must be non-null");
  *out = nullptr;
  try {
    auto* run = new mwsmf_run{
        mwsmf::run_scenario(scenario_path, seed, capture_trace != 0), {}};
    for (const mwsmf::MediationReport& r : run->result.reports) {
      run->mediation_text += r.to_line();
      run->mediation_text += '\n';
    }
    *out = run;
    t_last_error.clear();
    return MWSMF_OK;
  } catch (const mwsmf::Error& e) {
    return fail_error(e);
  } catch (const std::exception& e) {
    return fail_unknown(e);
  }
}

void mwsmf_run_free(mwsmf_run* run) { delete run; }

int mwsmf_run_exit_code(const mwsmf_run* run) {
  return run ? run->result.exit_code : MWSMF_ERR_ARGUMENT;
}

const char* mwsmf_run_metrics(const mwsmf_run* run) {
  return run ? run->result.metrics_text.c_str() : "";
}

const char* mwsmf_run_report(const mwsmf_run* run) {
  return run ? run->result.report_text.c_str() : "";
}

const char* mwsmf_run_trace(const mwsmf_run* run) {
  return run ? run->result.trace_text.c_str() : "";
}

const char* mwsmf_run_mediation_log(const mwsmf_run* run) {
  return run ? run->mediation_text.c_str() : "";
}

size_t mwsmf_run_invocations(const mwsmf_run* run) {
  return run ? run->result.outcomes.size() : 0;
}

const char* mwsmf_run_invocation_id(const mwsmf_run* run, size_t i) {
  const auto* oc = outcome_at(run, i);
  return oc ? oc->message_id.c_str() : "";
}

const char* mwsmf_run_invocation_status(const mwsmf_run* run, size_t i) {
  const auto* oc = outcome_at(run, i);
  return oc ? oc->status.c_str() : "";
}

const char* mwsmf_run_invocation_expected(const mwsmf_run* run, size_t i) {
  const auto* oc = outcome_at(run, i);
  return oc ? oc->expected.c_str() : "";
}

int mwsmf_run_invocation_matched(const mwsmf_run* run, size_t i) {
  const auto* oc = outcome_at(run, i);
  return oc && oc->matched ? 1 : 0;
}

uint64_t mwsmf_run_messages_sent(const mwsmf_run* run) {
  return run ? run->result.messages_sent : 0;
}

uint64_t mwsmf_run_messages_delivered(const mwsmf_run* run) {
  return run ? run->result.messages_delivered : 0;
}

uint64_t mwsmf_run_messages_failed(const mwsmf_run* run) {
  return run ? run->result.messages_failed : 0;
}

int mwsmf_report_from_file(const char* metrics_path, char** out_text) {
  if (!metrics_path || !out_text)
    return fail(MWSMF_ERR_ARGUMENT, "metrics_path and out_text must be non-null");
  *out_text = nullptr;
  try {
    std::string report = mwsmf::format_report(
        mwsmf::measure_invocation(mwsmf::load_metrics_file(metrics_path)));
    char* copy = static_cast<char*>(std::malloc(report.size() + 1));
    if (!copy) return fail(MWSMF_ERR_INTERNAL, "out of memory");
    std::memcpy(copy, report.c_str(), report.size() + 1);
    *out_text = copy;
    t_last_error.clear();
    return MWSMF_OK;
  } catch (const mwsmf::Error& e) {
    return fail_error(e);
  } catch (const std::exception& e) {
    return fail_unknown(e);
  }
}

void mwsmf_string_free(char* text) { std::free(text); }

int mwsmf_keystore_generate(const char* dir, const char* identity, int bits) {
  if (!dir || !identity || !*identity)
    return fail(MWSMF_ERR_ARGUMENT, "dir and identity must be non-empty");
  if (bits != 1024 && bits != 2048)
    return fail(MWSMF_ERR_ARGUMENT, "bits must be 1024 or 2048");
  try {
    mwsmf::Keystore::generate(dir, identity, bits);
    t_last_error.clear();
    return MWSMF_OK;
  } catch (const mwsmf::Error& e) {
    return fail_error(e);
  } catch (const std::exception& e) {
    return fail_unknown(e);
  }
}

}  // extern "C"
