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

#ifndef MWSMF_UTIL_HPP
#define MWSMF_UTIL_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mwsmf {

using Bytes = std::vector<uint8_t>;

std::string base64_encode(const uint8_t* data, size_t len);
std::string base64_encode(const Bytes& data);
Bytes base64_decode(std::string_view text);  // throws Error(MalformedXml) on bad input

std::string hex_encode(const uint8_t* data, size_t len);
std::string hex_encode(const Bytes& data);
Bytes hex_decode(std::string_view text);

// Percent-encoding for journal/report fields: escapes %, TAB, CR, LF.
std::string percent_encode(std::string_view s);
std::string percent_decode(std::string_view s);

// FNV-1a 64-bit, used for content-derived correlation tokens.
uint64_t fnv1a64(std::string_view data);

bool utf8_valid(std::string_view s);

std::string lowercase(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, char sep);

std::string read_file(const std::string& path);             // throws Error(IoError)
Bytes read_file_bytes(const std::string& path);
void write_file(const std::string& path, std::string_view content);
void write_file_bytes(const std::string& path, const Bytes& content);

}  // namespace mwsmf

#endif  // MWSMF_UTIL_HPP
