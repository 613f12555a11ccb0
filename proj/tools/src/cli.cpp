#include "affseg_cli/cli.hpp"

#include <algorithm>
#include <sstream>
#include <thread>

#include "affseg/error.hpp"
#include "affseg/parallel.hpp"
#include "commands.hpp"
#include "json.hpp"

namespace affseg::cli {
namespace {

using nlohmann::json;

// JSON run configuration. Top-level scalars configure global options
// ("threads"); an object named after a subcommand configures its flags, with
// keys spelled like the long flag names ("t-high", "size-min", ...).
// Explicit command-line flags always win, because the parser only consults
// the config for options the command line left empty.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return {}; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      input >> j;
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
    std::vector<CLI::ConfigItem> items;
    collect(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

  static void collect(const json& obj, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& items) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      const json& v = it.value();
      if (v.is_object()) {
        if (!parents.empty()) throw CLI::ConversionError("config nests deeper than one subcommand: " + it.key());
        collect(v, {it.key()}, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = it.key();
      if (v.is_array()) {
        for (const json& e : v) {
          if (e.is_object() || e.is_array()) throw CLI::ConversionError("config array " + it.key() + " must be flat");
          item.inputs.push_back(scalar(e));
        }
      } else if (v.is_null()) {
        throw CLI::ConversionError("config value " + it.key() + " is null");
      } else {
        item.inputs.push_back(scalar(v));
      }
      items.push_back(std::move(item));
    }
  }
};

bool is_usage(Errc code) {
  return code == Errc::InvalidArgument || code == Errc::InvalidPartition || code == Errc::TooManySeeds;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Affinity-graph segmentation toolkit", "affseg"};
  app.require_subcommand(1);
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON run configuration (flags override its values)");
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--threads", threads, "cap on worker threads; results do not depend on it")
      ->check(CLI::Range(1u, 1024u));

  std::vector<std::shared_ptr<void>> keep_alive;
  const std::vector<Command> commands = register_commands(app, keep_alive);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (!args.empty() && !args[0].starts_with("-") && app.get_subcommand_no_throw(args[0]) == nullptr) {
      err << "affseg: unknown subcommand '" << args[0] << "'\n";
      return kExitUsage;
    }
    err << "affseg: " << e.what() << "\n";
    if (args.empty()) err << app.help();
    return kExitUsage;
  }

  set_max_threads(threads);
  Io io{out, err};
  for (const Command& c : commands) {
    if (!c.app->parsed()) continue;
    try {
      c.action(io);
      return kExitOk;
    } catch (const UsageError& e) {
      err << "affseg " << c.app->get_name() << ": " << e.what() << "\n";
      return kExitUsage;
    } catch (const Error& e) {
      err << "affseg " << c.app->get_name() << ": " << e.what() << "\n";
      return is_usage(e.code()) ? kExitUsage : kExitRuntime;
    } catch (const std::exception& e) {
      err << "affseg " << c.app->get_name() << ": " << e.what() << "\n";
      return kExitRuntime;
    }
  }
  err << "affseg: no subcommand\n";
  return kExitUsage;
}

}  // namespace affseg::cli
