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

// Loopback server speaking the LLM and embedding protocols, for exercising
// the HTTP backends without a model.

#include <CLI11.hpp>

#include <iostream>

#include "dld/ingest.hpp"
#include "dld/testkit.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Scripted LLM / hashed-embedding HTTP stub"};
  std::string host = "127.0.0.1";
  int port = 8089;
  std::string script_path;
  std::string oracle_dataset;
  app.add_option("--host", host, "bind address");
  app.add_option("--port", port, "bind port");
  app.add_option("--llm-script", script_path, "LLM script file")->check(CLI::ExistingFile);
  app.add_option("--oracle", oracle_dataset, "serve the perfect-oracle script for this dataset");
  CLI11_PARSE(app, argc, argv);

  try {
    dld::testkit::ScriptedLlm script;
    if (!oracle_dataset.empty()) {
      script = dld::testkit::perfect_oracle_script(dld::load_dataset(oracle_dataset));
    } else if (!script_path.empty()) {
      script = dld::testkit::load_llm_script(script_path);
    }
    dld::testkit::StubServer server(std::move(script));
    std::cout << "serving POST /llm and POST /embed on http://" << host << ":" << port << std::endl;
    server.run(host, port);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
