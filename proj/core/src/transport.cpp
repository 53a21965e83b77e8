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

#include "dld/transport.hpp"

#include <httplib.h>

#include <charconv>

namespace dld {

namespace {

class HttplibTransport final : public HttpTransport {
 public:
  HttpResponse send(const HttpRequest& request) override {
    const ParsedUrl url = parse_url(request.url);
    httplib::Client client(url.scheme + "://" + url.host + ":" + std::to_string(url.port));
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(request.timeout - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());
    client.set_follow_location(true);

    httplib::Headers headers;
    for (const auto& [name, value] : request.headers) headers.emplace(name, value);

    httplib::Result result;
    if (request.method == "GET") {
      result = client.Get(url.path_and_query, headers);
    } else if (request.method == "POST") {
      result = client.Post(url.path_and_query, headers, request.body,
                           request.content_type.empty() ? "application/json" : request.content_type);
    } else {
      throw ArgumentError("unsupported HTTP method " + request.method);
    }
    if (!result) {
      throw TransportError(request.method + " " + request.url + ": " +
                           httplib::to_string(result.error()));
    }
    return {result->status, result->body};
  }
};

}  // namespace

std::shared_ptr<HttpTransport> make_http_transport() {
  return std::make_shared<HttplibTransport>();
}

ParsedUrl parse_url(std::string_view url) {
  ParsedUrl out;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) throw ArgumentError("malformed URL: " + std::string(url));
  out.scheme = std::string(url.substr(0, scheme_end));
  if (out.scheme != "http" && out.scheme != "https") {
    throw ArgumentError("unsupported URL scheme: " + std::string(url));
  }
  std::string_view rest = url.substr(scheme_end + 3);
  const auto path_start = rest.find_first_of("/?");
  std::string_view authority = rest.substr(0, path_start);
  out.path_and_query = path_start == std::string_view::npos ? "/" : std::string(rest.substr(path_start));
  if (!out.path_and_query.empty() && out.path_and_query.front() == '?') {
    out.path_and_query.insert(out.path_and_query.begin(), '/');
  }
  out.port = out.scheme == "https" ? 443 : 80;
  const auto colon = authority.rfind(':');
  if (colon != std::string_view::npos) {
    const auto port_text = authority.substr(colon + 1);
    int port = 0;
    const auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
    if (ec != std::errc() || ptr != port_text.data() + port_text.size() || port <= 0 || port > 65535) {
      throw ArgumentError("malformed URL port: " + std::string(url));
    }
    out.port = port;
    authority = authority.substr(0, colon);
  }
  if (authority.empty()) throw ArgumentError("malformed URL host: " + std::string(url));
  out.host = std::string(authority);
  return out;
}

std::string url_encode(std::string_view text) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : text) {
    const bool unreserved = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                            (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.' || c == '~';
    if (unreserved) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0x0f]);
    }
  }
  return out;
}

}  // namespace dld
