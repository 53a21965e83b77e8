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

#include <gtest/gtest.h>

#include "dld/transport.hpp"

namespace dld {
namespace {

TEST(ParseUrl, Components) {
  const ParsedUrl a = parse_url("https://www.wikidata.org/w/api.php?action=wbsearchentities");
  EXPECT_EQ(a.scheme, "https");
  EXPECT_EQ(a.host, "www.wikidata.org");
  EXPECT_EQ(a.port, 443);
  EXPECT_EQ(a.path_and_query, "/w/api.php?action=wbsearchentities");

  const ParsedUrl b = parse_url("http://127.0.0.1:8089");
  EXPECT_EQ(b.port, 8089);
  EXPECT_EQ(b.path_and_query, "/");

  EXPECT_EQ(parse_url("http://h?q=1").path_and_query, "/?q=1");
}

TEST(ParseUrl, Rejections) {
  EXPECT_THROW(parse_url("localhost:80/x"), ArgumentError);
  EXPECT_THROW(parse_url("ftp://h/x"), ArgumentError);
  EXPECT_THROW(parse_url("http://h:0/"), ArgumentError);
  EXPECT_THROW(parse_url("http://h:99999/"), ArgumentError);
  EXPECT_THROW(parse_url("http://h:8x/"), ArgumentError);
  EXPECT_THROW(parse_url("http:///path"), ArgumentError);
}

TEST(UrlEncode, ReservedAndUtf8) {
  EXPECT_EQ(url_encode("abc-_.~XYZ09"), "abc-_.~XYZ09");
  EXPECT_EQ(url_encode("a b&c=d"), "a%20b%26c%3Dd");
  EXPECT_EQ(url_encode("\xc3\xa9"), "%C3%A9");
}

TEST(HttpTransport, ConnectionRefusedIsTransportError) {
  const auto t = make_http_transport();
  HttpRequest r;
  r.url = "http://127.0.0.1:1/never";
  r.timeout = std::chrono::milliseconds(500);
  EXPECT_THROW(t->send(r), TransportError);
  r.method = "DELETE";
  EXPECT_THROW(t->send(r), ArgumentError);
}

}  // namespace
}  // namespace dld
