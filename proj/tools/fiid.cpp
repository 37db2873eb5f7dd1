// Command-line front end. Flags are generated from each command's default
// parameters, so the manifest always records the full parameter set.

#include <cstdio>
#include <iostream>
#include <map>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "fiid/cli/commands.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitMismatch = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

std::string flag_name(const std::string& key) {
  std::string out = "--" + key;
  for (char& c : out)
    if (c == '_') c = '-';
  return out;
}

/// Converts a flag's text to the JSON type of its default.
nlohmann::json typed_value(const nlohmann::json& def, const std::string& key, const std::string& text) {
  if (def.is_string()) return text;
  if (def.is_number_float()) return fiid::cli::detail::number(text, key);
  const std::int64_t x = fiid::cli::detail::whole(text, key);
  if (def.is_number_unsigned()) {
    if (x < 0) throw fiid::InputError(key + ": expected a non-negative integer");
    return static_cast<std::uint64_t>(x);
  }
  return x;
}

struct CommandFlags {
  const fiid::cli::Command* command = nullptr;
  CLI::App* app = nullptr;
  std::map<std::string, std::string> text;
  std::map<std::string, bool> flags;
  std::string manifest;
};

void print(const std::string& s) { std::fwrite(s.data(), 1, s.size(), stdout); }

int run(int argc, char** argv) {
  CLI::App app{"Factor-of-i.i.d. independent sets: simulation, coupling and counting experiments"};
  app.require_subcommand(1);

  std::vector<std::unique_ptr<CommandFlags>> all;
  for (const auto& cmd : fiid::cli::commands()) {
    auto f = std::make_unique<CommandFlags>();
    f->command = &cmd;
    f->app = app.add_subcommand(cmd.name, cmd.help);
    for (const auto& [key, def] : cmd.defaults.items()) {
      if (def.is_boolean()) {
        f->flags[key] = def.get<bool>();
        f->app->add_flag(flag_name(key), f->flags[key]);
      } else {
        f->text[key] = def.is_string() ? def.get<std::string>() : def.dump();
        f->app->add_option(flag_name(key), f->text[key])->capture_default_str();
      }
    }
    f->app->add_option("--manifest", f->manifest, "manifest path (default: <out>.manifest.json)");
    all.push_back(std::move(f));
  }

  std::string replay_manifest, replay_out;
  bool replay_check = false;
  CLI::App* replay = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  replay->add_option("manifest", replay_manifest, "manifest written by an earlier run")->required();
  replay->add_option("--out", replay_out, "write the output here instead of the recorded path");
  replay->add_flag("--check", replay_check, "compare against the recorded output instead of overwriting it");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (replay->parsed()) {
    const nlohmann::json manifest = [&] {
      try {
        return nlohmann::json::parse(fiid::read_file(replay_manifest));
      } catch (const nlohmann::json::exception&) {
        throw fiid::InputError("manifest: not valid JSON");
      }
    }();
    const auto recorded = manifest.at("params").at("out").get<std::string>();
    if (replay_check) {
      if (recorded.empty()) throw fiid::InputError("manifest records no output file to check");
      const auto outcome = fiid::cli::replay(manifest);
      if (outcome.output != fiid::read_file(recorded)) {
        std::cerr << "replay differs from " << recorded << "\n";
        return kExitMismatch;
      }
      std::cerr << "replay matches " << recorded << "\n";
      return kExitOk;
    }
    const auto outcome =
        fiid::cli::replay(manifest, replay_out.empty() ? std::nullopt : std::optional<std::string>(replay_out));
    fiid::cli::write_outcome(outcome, "", print);
    return kExitOk;
  }

  for (const auto& f : all) {
    if (!f->app->parsed()) continue;
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [key, def] : f->command->defaults.items()) {
      if (def.is_boolean()) params[key] = f->flags[key];
      else params[key] = typed_value(def, key, f->text[key]);
    }
    const auto outcome = fiid::cli::run_command(f->command->name, params);
    fiid::cli::write_outcome(outcome, f->manifest, print);
    return kExitOk;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const fiid::InputError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fiid::NumericalError& e) {
    std::cerr << "numerical guard: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
}
