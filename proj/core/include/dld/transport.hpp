// Copyright 2026 The DLD Authors. All Rights Reserved.
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

#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dld/error.hpp"

namespace dld {

struct HttpRequest {
  std::string method = "GET";
  std::string url;  // absolute, scheme://host[:port]/path[?query]
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  std::string content_type;
  std::chrono::milliseconds timeout{30000};
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

// The connection could not be made or timed out. Non-2xx statuses are not
// errors at this layer.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Every network call in the library goes through one of these, so tests can
// swap in a transport that fails or replays.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse send(const HttpRequest& request) = 0;
};

/// Real transport over cpp-httplib (HTTP and HTTPS).
std::shared_ptr<HttpTransport> make_http_transport();

struct ParsedUrl {
  std::string scheme;
  std::string host;
  int port = 0;
  std::string path_and_query;
};

/// Throws ArgumentError for anything that is not http(s)://host[:port][/...].
ParsedUrl parse_url(std::string_view url);

/// Percent-encodes everything outside RFC 3986 unreserved characters.
std::string url_encode(std::string_view text);

}  // namespace dld
