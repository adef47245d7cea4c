// Copyright 2026 The relchat Authors
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

// relchat command line: serve the gateway, chat on stdin, drive a script,
// summarize transcripts or fit ranker weights.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "relchat/relchat.hpp"
#include "relchat/server.hpp"

namespace {

int summarize_files(const std::vector<std::string>& files, bool as_json) {
  std::vector<relchat::SessionMetrics> all;
  for (const auto& f : files) all.push_back(relchat::compute_metrics(relchat::load_transcript(f)));
  auto report = relchat::summarize(all);
  if (as_json) {
    std::cout << relchat::to_json(report).dump(2) << "\n";
  } else {
    std::cout << relchat::to_text(report);
  }
  return 0;
}

int fit_files(const std::vector<std::string>& files) {
  std::vector<relchat::RatedSample> samples;
  for (const auto& f : files) {
    auto more = relchat::rated_samples(relchat::load_transcript(f));
    samples.insert(samples.end(), more.begin(), more.end());
  }
  auto w = relchat::fit_weights(samples);
  std::cout << nlohmann::json(w.to_map()).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relchat: mixed-initiative open-domain dialogue engine"};
  std::string config_path = "data/config.json";
  int port = -1;
  bool repl = false;
  bool debug = false;
  bool json_report = false;
  std::string transcript_dir;
  std::string script;
  std::vector<std::string> metrics_files;
  std::vector<std::string> fit_files_in;

  app.add_option("--config", config_path, "engine config JSON")->check(CLI::ExistingFile);
  app.add_option("--port", port, "gateway port (default from config)")->check(CLI::Range(0, 65535));
  app.add_flag("--repl", repl, "chat on stdin/stdout");
  app.add_option("--transcript", transcript_dir, "write session transcripts to DIR");
  app.add_option("--script", script, "drive the user turns in FILE and print the dialogue")
      ->check(CLI::ExistingFile);
  app.add_flag("--debug", debug, "print the ranked candidates after each turn");
  app.add_option("--metrics", metrics_files, "summarize transcript files")->check(CLI::ExistingFile);
  app.add_flag("--json", json_report, "with --metrics: JSON report instead of a table");
  app.add_option("--fit-weights", fit_files_in, "fit ranker weights from rated transcripts")
      ->check(CLI::ExistingFile);
  CLI11_PARSE(app, argc, argv);

  try {
    if (!metrics_files.empty()) return summarize_files(metrics_files, json_report);
    if (!fit_files_in.empty()) return fit_files(fit_files_in);

    relchat::EngineConfig config = relchat::load_config(config_path);
    if (!transcript_dir.empty()) config.transcript_dir = transcript_dir;
    if (port >= 0) config.port = port;
    relchat::Engine engine(config);

    if (!script.empty()) {
      std::ifstream in(script);
      relchat::run_script(engine, in, std::cout, debug);
      return 0;
    }
    if (repl) {
      relchat::run_repl(engine, std::cin, std::cout, debug);
      return 0;
    }
    relchat::Gateway gateway(engine, static_cast<unsigned short>(config.port), "0.0.0.0");
    std::cerr << "relchat listening on port " << gateway.port() << "\n";
    gateway.run();
  } catch (const relchat::Error& e) {
    std::cerr << "relchat: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
