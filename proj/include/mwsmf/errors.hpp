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

#ifndef MWSMF_ERRORS_HPP
#define MWSMF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mwsmf {

enum class Err {
  // message model
  MalformedXml,
  NotAnEnvelope,
  // security
  AlgorithmNotInProfile,
  KeyTooSmallForAlg,
  NoSignaturePresent,
  KeyUnwrapFailed,
  PaddingInvalid,
  NotEncrypted,
  NoTimestamp,
  CryptoFailure,
  KeystoreError,
  // registry
  DuplicateServiceId,
  InvalidRecord,
  // overlay
  NoSuperPeer,
  NoUsableInterface,
  UnknownPeer,
  PeerUnreachable,
  ClockMovedBackwards,
  // mobile host
  PathConflict,
  FootprintExceeded,
  HostSleeping,
  BadMagic,
  WrongTarget,
  // mediation
  NoRouteMatched,
  SourceVerificationFailed,
  ProfileUnsupported,
  UnknownHost,
  HostUnreachable,
  Timeout,
  // harness
  ScenarioInvalid,
  NoData,
  IoError,
  Internal,
};

const char* err_name(Err e);

/// Library-wide exception; `code` identifies the failure class, `what()`
/// carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(Err code, const std::string& detail)
      : std::runtime_error(std::string(err_name(code)) + ": " + detail),
        code_(code) {}

  Err code() const { return code_; }

 private:
  Err code_;
};

}  // namespace mwsmf

#endif  // MWSMF_ERRORS_HPP
