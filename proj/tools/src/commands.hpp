#pragma once

#include <functional>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "CLI11.hpp"

namespace affseg::cli {

/// Raised for argument combinations the parser cannot check itself; maps to
/// the usage exit code.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Io {
  std::ostream& out;
  std::ostream& err;
};

struct Command {
  CLI::App* app = nullptr;
  std::function<void(Io&)> action;
};

/// Adds every subcommand to `app`. Option storage lives in `keep_alive`.
std::vector<Command> register_commands(CLI::App& app, std::vector<std::shared_ptr<void>>& keep_alive);

}  // namespace affseg::cli
