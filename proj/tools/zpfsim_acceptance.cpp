/*
   Copyright 2026 The zpfsim Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <CLI11.hpp>

#include <cstdio>

#include "zpfsim/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"zpfsim acceptance suite"};
  zpfsim::acceptance::Options o;
  std::string dir = o.config_dir.string();
  app.add_option("--configs", dir, "directory of bundled configurations")->capture_default_str();
  app.add_option("--threads", o.threads, "worker threads")->check(CLI::Range(1u, 1024u))->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  o.config_dir = dir;
  try {
    const auto results = zpfsim::acceptance::run_all(o, [](const zpfsim::acceptance::CriterionResult& r) {
      std::printf("%s\n", zpfsim::acceptance::line(r).c_str());
      std::fflush(stdout);
    });
    for (const auto& r : results)
      if (!r.passed) return 1;
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance suite aborted: %s\n", e.what());
    return 2;
  }
}
