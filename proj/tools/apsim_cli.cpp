#include <fstream>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "apsim/experiment.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 2;
constexpr int kRuntime = 3;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out;
  unsigned threads = 0;
  bool show_config = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config_path, "INI file with global keys and [kind] sections")
      ->check(CLI::ExistingFile);
  cmd->add_option("-s,--set", args.overrides, "Override a key, e.g. --set eps=0.2 (repeatable)");
}

apsim::ExperimentConfig build_config(apsim::ExperimentKind kind, const CommonArgs& args) {
  apsim::ExperimentConfig config(kind);
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in) throw std::runtime_error("cannot read " + args.config_path);
    config = apsim::load_config(in, kind);
  }
  for (const auto& kv : args.overrides) apply_override(config, kv);
  return config;
}

int report(const apsim::ExperimentConfig& config, const std::vector<apsim::Violation>& violations) {
  const auto name = apsim::kind_name(config.kind());
  if (violations.empty()) {
    std::cout << name << ": ok\n";
    return kOk;
  }
  for (const auto& v : violations) std::cerr << name << ": " << v.key << ": " << v.message << '\n';
  return kInvalid;
}

int run(apsim::ExperimentKind kind, const CommonArgs& args) {
  apsim::ExperimentConfig config = build_config(kind, args);
  if (args.show_config) {
    std::cout << config.canonical_text();
    return report(config, apsim::validate(config));
  }
  const std::filesystem::path out =
      args.out.empty() ? apsim::default_output_root() / std::string(apsim::kind_name(kind)) : std::filesystem::path(args.out);
  try {
    const auto manifest = apsim::run_experiment(config, out, args.threads);
    std::cout << "wrote " << manifest.files.size() + 1 << " files to " << manifest.root.string()
              << " (config " << manifest.config_hash << ")\n";
    return kOk;
  } catch (const apsim::ValidationError& e) {
    return report(config, e.violations());
  }
}

int validate(const std::string& kind_arg, const CommonArgs& args) {
  std::vector<apsim::ExperimentKind> kinds;
  if (!kind_arg.empty()) {
    kinds.push_back(*apsim::parse_kind(kind_arg));
  } else if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    kinds = apsim::sections_in(in);
  }
  if (kinds.empty()) kinds = apsim::all_kinds();
  int status = kOk;
  for (auto kind : kinds) {
    const auto config = build_config(kind, args);
    if (report(config, apsim::validate(config)) != kOk) status = kInvalid;
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seeded simulations of two-species evacuation, reflected OU paths and finite queues"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string validate_kind;
  std::optional<apsim::ExperimentKind> chosen;

  for (auto kind : apsim::all_kinds()) {
    auto* cmd = app.add_subcommand(std::string(apsim::kind_name(kind)), "Run the " +
                                                                            std::string(apsim::kind_name(kind)) +
                                                                            " experiment");
    add_common(cmd, args);
    cmd->add_option("-o,--out", args.out, "Output directory (default $APSIM_OUTPUT_ROOT/<kind>)");
    cmd->add_option("-j,--threads", args.threads, "Worker threads, 0 = all cores");
    cmd->add_flag("--show-config", args.show_config, "Print the resolved configuration and validate only");
    cmd->callback([&chosen, kind] { chosen = kind; });
  }

  std::vector<std::string> kind_names;
  for (auto kind : apsim::all_kinds()) kind_names.emplace_back(apsim::kind_name(kind));
  auto* check = app.add_subcommand("validate", "Check configurations without running anything");
  add_common(check, args);
  check->add_option("-k,--kind", validate_kind, "Experiment kind (default: sections in the file, else all)")
      ->check(CLI::IsMember(kind_names));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (check->parsed()) return validate(validate_kind, args);
    return run(*chosen, args);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
}
