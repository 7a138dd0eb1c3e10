// Copyright 2026 The nmpure Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line driver: parameter sweeps, analytic curves, estimator runs and
// process tomography, emitted as CSV or JSON tables.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "nmpure/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string format = "csv";
  std::size_t workers = 1;
  bool exact = false;
  std::optional<std::uint64_t> shots;
};

nmpure::harness::SweepSpec load_spec(const Options& opt, const std::string& default_case) {
  nmpure::harness::SweepSpec spec;
  spec.case_name = default_case;
  if (!opt.config_path.empty()) {
    std::ifstream in(opt.config_path);
    if (!in) throw nmpure::ConfigError("cannot open config file '" + opt.config_path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    spec = nmpure::harness::parse_spec(ss.str(), default_case);
  }
  if (opt.seed) spec.seed = opt.seed;
  if (opt.exact) spec.shots.reset();
  if (opt.shots) spec.shots = opt.shots;
  return spec;
}

int run(const Options& opt, const std::string& command) {
  using namespace nmpure::harness;
  static const std::map<std::string, std::string> kDefaultCase{{"sweep-unitary", "unitary"},
                                                               {"sweep-channel", "channel"},
                                                               {"analytic", "analytic"},
                                                               {"estimate", "unitary"},
                                                               {"tomography", "channel"}};
  try {
    const SweepSpec spec = load_spec(opt, kDefaultCase.at(command));
    ResultTable table;
    if (command == "sweep-unitary") {
      table = cmd_sweep_unitary(spec, opt.workers);
    } else if (command == "sweep-channel") {
      table = cmd_sweep_channel(spec, opt.workers);
    } else if (command == "analytic") {
      table = cmd_analytic(spec, opt.workers);
    } else if (command == "estimate") {
      table = cmd_estimate(spec, opt.workers);
    } else {
      table = cmd_tomography(spec, opt.workers);
    }
    const std::string text = opt.format == "json" ? to_json_text(table, spec) : to_csv(table, spec);
    if (opt.out_path.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(opt.out_path, std::ios::binary);
      if (!out) throw nmpure::ConfigError("cannot write '" + opt.out_path + "'");
      out << text;
    }
    return 0;
  } catch (const nmpure::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nmpure::SingularDenominator& e) {
    std::cerr << "numerical failure: " << e.what() << "\n"
              << "hint: raise the shot count or shorten the evolution time\n";
    return kExitNumerical;
  } catch (const nmpure::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-Markovian noise suppression by twirling and purification"};
  app.set_version_flag("--version", nmpure::harness::kVersion);
  app.require_subcommand(1);

  Options opt;
  std::string command;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"sweep-unitary", "Fidelity sweep over evolution time, gate case"},
      {"sweep-channel", "Fidelity sweep over evolution time, partial-swap channel case"},
      {"analytic", "Toy-model suppression curves"},
      {"estimate", "Shot-sampled ratio estimator against its predicted variance"},
      {"tomography", "Process matrices with and without suppression"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "Root seed");
    sub->add_option("--out", opt.out_path, "Output file (default: stdout)");
    sub->add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--workers", opt.workers, "Worker threads")->check(CLI::PositiveNumber);
    auto* exact = sub->add_flag("--exact", opt.exact, "Exact expectation values, no shot sampling");
    sub->add_option("--shots", opt.shots, "Shots per estimate")->excludes(exact);
    sub->callback([&command, name = name] { command = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  return run(opt, command);
}
