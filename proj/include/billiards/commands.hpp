#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "billiards/error.hpp"
#include "billiards/geometry.hpp"

namespace billiards {

struct CommandOptions {
  std::filesystem::path config;
  std::optional<std::string> word;  // "1,2" periodic, "open:1,2,3" segment
  std::optional<double> alpha;
  std::optional<std::size_t> m;
  std::optional<std::uint64_t> seed;
  bool oracle = false;
  std::optional<std::filesystem::path> out;
  Execution exec = Execution::parallel;
};

/// 2 config, 3 condition (H), 4 solver or grazing, 5 I/O.
int exit_code(ErrorKind kind);

/// check | orbit | lyapunov | sweep | derivative | oracle. Reports go to
/// `out`, diagnostics to `err`; returns the process exit code.
int run_command(const std::string& name, const CommandOptions& options,
                std::ostream& out, std::ostream& err);

}  // namespace billiards
