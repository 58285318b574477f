// Copyright 2026 The Athena Authors.
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

// Runs an external error-correction tool through a command template.
//
// The template must contain {input} and {output} plus exactly one tunable
// placeholder named by param_name (e.g. {k} or {GL}). Input reads are written
// to a private temporary directory, the command runs under /bin/sh, and the
// output file is parsed as FASTQ or FASTA. stdout and stderr are captured to
// files in the same directory; the directory is removed on success and kept
// on failure for debugging.

#pragma once

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "athena/errors.hpp"
#include "athena/seqio.hpp"

namespace athena::ecsim {

using seqio::ReadSet;

struct ToolAdapter {
  std::string command_template;
  std::filesystem::path workdir;  // empty: ATHENA_TMPDIR, else the system temp dir
  double timeout_seconds = 3600.0;
  std::string param_name = "k";

  /// Throws ArgumentError unless the template is usable.
  void validate() const {
    std::set<std::string> names;
    static const std::regex placeholder(R"(\{([A-Za-z_][A-Za-z0-9_]*)\})");
    for (std::sregex_iterator it(command_template.begin(), command_template.end(), placeholder), end;
         it != end; ++it) {
      names.insert((*it)[1].str());
    }
    if (!names.contains("input")) throw ArgumentError("adapter template lacks {input}");
    if (!names.contains("output")) throw ArgumentError("adapter template lacks {output}");
    if (param_name == "input" || param_name == "output" || param_name.empty()) {
      throw ArgumentError("invalid tunable placeholder name: " + param_name);
    }
    names.erase("input");
    names.erase("output");
    if (names.size() != 1 || !names.contains(param_name)) {
      throw ArgumentError("adapter template must contain exactly one tunable placeholder {" + param_name + "}");
    }
    if (!(timeout_seconds > 0.0)) throw ArgumentError("adapter timeout must be positive");
  }

  static ToolAdapter from_json(const nlohmann::json& j) {
    ToolAdapter a;
    a.command_template = j.at("template").get<std::string>();
    if (j.contains("timeout")) a.timeout_seconds = j.at("timeout").get<double>();
    if (j.contains("param_name")) a.param_name = j.at("param_name").get<std::string>();
    if (j.contains("workdir")) a.workdir = j.at("workdir").get<std::string>();
    a.validate();
    return a;
  }

  nlohmann::json to_json() const {
    return {{"template", command_template},
            {"timeout", timeout_seconds},
            {"param_name", param_name},
            {"workdir", workdir.string()}};
  }
};

namespace detail {

inline std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

inline std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path temp_root(const ToolAdapter& adapter) {
  if (!adapter.workdir.empty()) return adapter.workdir;
  if (const char* env = std::getenv("ATHENA_TMPDIR"); env != nullptr && *env != '\0') return env;
  return std::filesystem::temp_directory_path();
}

struct ProcessOutcome {
  int exit_code = 0;
  bool timed_out = false;
};

inline ProcessOutcome run_shell(const std::string& command, const std::filesystem::path& stdout_path,
                                const std::filesystem::path& stderr_path, const std::filesystem::path& cwd,
                                double timeout_seconds) {
  const pid_t pid = fork();
  if (pid < 0) throw Error("fork failed");
  if (pid == 0) {
    setpgid(0, 0);
    const int out = open(stdout_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    const int err = open(stderr_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (out < 0 || err < 0 || chdir(cwd.c_str()) != 0) _exit(127);
    dup2(out, STDOUT_FILENO);
    dup2(err, STDERR_FILENO);
    close(out);
    close(err);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_seconds);
  int status = 0;
  for (;;) {
    const pid_t r = waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0) throw Error("waitpid failed");
    if (std::chrono::steady_clock::now() >= deadline) {
      kill(-pid, SIGKILL);
      waitpid(pid, &status, 0);
      return {-1, true};
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  if (WIFEXITED(status)) return {WEXITSTATUS(status), false};
  return {128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0), false};
}

}  // namespace detail

/// Runs the adapter's tool at one parameter value and parses its output.
inline ReadSet run_external(const ToolAdapter& adapter, long param_value, const ReadSet& input) {
  adapter.validate();
  const std::filesystem::path root = detail::temp_root(adapter);
  std::filesystem::create_directories(root);
  std::string pattern = (root / "athena-XXXXXX").string();
  if (mkdtemp(pattern.data()) == nullptr) throw AdapterError("cannot create temp dir under " + root.string(), -1, "", "");
  const std::filesystem::path dir = pattern;
  const auto input_path = dir / "input.fastq";
  const auto output_path = dir / "output.fastq";
  const auto stdout_path = dir / "stdout.log";
  const auto stderr_path = dir / "stderr.log";
  seqio::write_fastq_file(input, input_path);

  std::string command = adapter.command_template;
  command = detail::replace_all(command, "{input}", detail::shell_quote(input_path.string()));
  command = detail::replace_all(command, "{output}", detail::shell_quote(output_path.string()));
  command = detail::replace_all(command, "{" + adapter.param_name + "}", std::to_string(param_value));

  const auto outcome = detail::run_shell(command, stdout_path, stderr_path, dir, adapter.timeout_seconds);
  auto fail = [&](const std::string& what, int code) -> AdapterError {
    return AdapterError(what + " (logs: " + stderr_path.string() + ")", code, detail::slurp(stderr_path),
                        stderr_path.string());
  };
  if (outcome.timed_out) throw fail("external tool timed out", -1);
  if (outcome.exit_code != 0) {
    throw fail("external tool exited with status " + std::to_string(outcome.exit_code), outcome.exit_code);
  }
  if (!std::filesystem::exists(output_path)) throw fail("external tool produced no output file", 0);
  ReadSet result;
  try {
    result = seqio::read_file(output_path);
  } catch (const Error& e) {
    throw fail(std::string("unparseable tool output: ") + e.what(), 0);
  }
  result.source = "external:" + adapter.param_name + "=" + std::to_string(param_value);
  std::error_code ec;
  std::filesystem::remove_all(dir, ec);
  return result;
}

}  // namespace athena::ecsim
