// Copyright 2026 the edgesim authors
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

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "edgesim/check/checker.hpp"
#include "edgesim/world/world.hpp"

namespace {

using namespace edgesim;

// `run <file-or-builtin-name>`: builtin names resolve inside --scenarios-dir.
std::string resolve_scenario_path(const std::string& arg, const std::string& dir) {
  if (std::filesystem::exists(arg)) return arg;
  std::string candidate = dir + "/" + arg + ".scn";
  if (std::filesystem::exists(candidate)) return candidate;
  return arg;  // let the loader produce the error
}

int cmd_run(const std::string& path, std::optional<std::uint64_t> seed,
            std::optional<std::uint64_t> until, std::string trace_path, std::string dump_dir) {
  Scenario sc = load_scenario_file(path);
  if (until) sc.run_until = *until;
  if (trace_path.empty()) trace_path = sc.name + ".trace";
  if (dump_dir.empty()) dump_dir = sc.name + ".dumps";
  ExecuteResult res = execute_scenario(sc, seed, trace_path, dump_dir);
  std::cout << "scenario=" << sc.name << " seed=" << seed.value_or(sc.seed)
            << " trace=" << trace_path << " dumps=" << dump_dir << "\n";
  for (const auto& line : res.report_lines) std::cout << line << "\n";
  return res.all_passed ? 0 : 1;
}

int cmd_check(const std::string& trace_path, const std::string& dump_dir,
              const std::string& scenario_path) {
  Scenario sc = load_scenario_file(scenario_path);
  check::RunArtifacts art = check::RunArtifacts::load(trace_path, dump_dir);
  bool all = true;
  for (const auto& r : check::run_scenario_checks(art, sc)) {
    std::cout << check::report_line(r) << "\n";
    if (!r.passed) all = false;
  }
  return all ? 0 : 1;
}

int cmd_list(const std::string& dir) {
  for (const auto& name : builtin_scenario_names()) {
    std::string path = dir + "/" + name + ".scn";
    std::cout << name;
    try {
      Scenario sc = load_scenario_file(path);
      std::cout << "  (nodes=" << sc.nodes.size() << " stages=" << sc.pipeline.size()
                << " faults=" << sc.faults.size() << ")";
    } catch (const std::exception&) {
      std::cout << "  (missing: " << path << ")";
    }
    std::cout << "\n";
  }
  return 0;
}

int cmd_compare(const std::string& dir_a, const std::string& dir_b, const TopicId& topic,
                const std::string& trace_a, const std::string& trace_b) {
  check::RunArtifacts a = check::RunArtifacts::load(trace_a, dir_a);
  check::RunArtifacts b = check::RunArtifacts::load(trace_b, dir_b);
  auto r = check::check_equivalence(check::committed_view(a, topic),
                                    check::committed_view(b, topic));
  std::cout << check::report_line(r) << "\n";
  return r.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic fault-injection simulator for edge/cloud data pipelines"};
  app.require_subcommand(1);

  std::string scenarios_dir = "scenarios";
  app.add_option("--scenarios-dir", scenarios_dir, "directory holding the builtin .scn files");

  std::string run_file, run_trace, run_dumps;
  std::optional<std::uint64_t> run_seed, run_until;
  auto* run = app.add_subcommand("run", "execute a scenario");
  run->add_option("scenario", run_file, "scenario file (or builtin name)")->required();
  run->add_option("--seed", run_seed, "override the scenario seed");
  run->add_option("--until", run_until, "override run_until (virtual ms)");
  run->add_option("--trace", run_trace, "trace output path");
  run->add_option("--dump-dir", run_dumps, "topic dump directory");

  std::string chk_trace, chk_dumps, chk_scenario;
  auto* chk = app.add_subcommand("check", "evaluate a scenario's checks over run artifacts");
  chk->add_option("trace", chk_trace, "trace file")->required();
  chk->add_option("dump-dir", chk_dumps, "topic dump directory")->required();
  chk->add_option("--scenario", chk_scenario, "scenario file")->required();

  auto* lst = app.add_subcommand("list", "list builtin scenarios");

  std::string cmp_a, cmp_b, cmp_topic, cmp_trace_a, cmp_trace_b;
  auto* cmp = app.add_subcommand("compare", "compare the deduplicated view of one topic "
                                            "across two runs");
  cmp->add_option("dump-a", cmp_a, "dump directory of run A")->required();
  cmp->add_option("dump-b", cmp_b, "dump directory of run B")->required();
  cmp->add_option("--topic", cmp_topic, "topic to compare")->required();
  cmp->add_option("--trace-a", cmp_trace_a, "trace of run A")->required();
  cmp->add_option("--trace-b", cmp_trace_b, "trace of run B")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(resolve_scenario_path(run_file, scenarios_dir), run_seed, run_until,
                     run_trace, run_dumps);
    }
    if (chk->parsed()) return cmd_check(chk_trace, chk_dumps, chk_scenario);
    if (lst->parsed()) return cmd_list(scenarios_dir);
    if (cmp->parsed()) return cmd_compare(cmp_a, cmp_b, cmp_topic, cmp_trace_a, cmp_trace_b);
  } catch (const edgesim::ScenarioError& e) {
    for (const auto& err : e.errors) std::cerr << "error: " << err << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
