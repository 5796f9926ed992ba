// kpforge command-line driver. Talks to the library only through its C API.
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kpforge/kpforge.h"

namespace {

struct ConfigHandle {
  kpf_config* ptr = nullptr;
  ~ConfigHandle() { kpf_config_destroy(ptr); }
};

int fail(kpf_status status) {
  std::fprintf(stderr, "kpforge: %s: %s\n", kpf_status_name(status), kpf_last_error());
  return static_cast<int>(status);
}

void print_line(const char* line, void*) { std::printf("%s\n", line); }

std::string flag_for(const std::string& key) {
  std::string flag = key;
  for (char& c : flag)
    if (c == '_') c = '-';
  return "--" + flag;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage contrastive keyphrase extraction and generation"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kpf_version());

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "Run config file (key = value lines)");
  app.add_option("--set", overrides, "Override a config key: --set key=value")->take_all();

  // Every config key doubles as a flag, e.g. batch_size -> --batch-size.
  std::map<std::string, std::string> flag_values;
  for (size_t i = 0; i < kpf_config_key_count(); ++i) {
    const std::string key = kpf_config_key_name(i);
    app.add_option(flag_for(key), flag_values[key], "config key " + key);
  }

  std::vector<CLI::App*> commands;
  for (size_t i = 0; i < kpf_command_count(); ++i) commands.push_back(app.add_subcommand(kpf_command_name(i)));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return KPF_ERR_USAGE;
  }

  ConfigHandle cfg;
  if (auto s = kpf_config_create(&cfg.ptr); s != KPF_OK) return fail(s);
  if (!config_path.empty())
    if (auto s = kpf_config_load(cfg.ptr, config_path.c_str()); s != KPF_OK) return fail(s);
  if (auto s = kpf_config_apply_env(cfg.ptr); s != KPF_OK) return fail(s);
  for (const auto& [key, value] : flag_values) {
    if (app.count(flag_for(key)) == 0) continue;
    if (auto s = kpf_config_set(cfg.ptr, key.c_str(), value.c_str()); s != KPF_OK) return fail(s);
  }
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "kpforge: usage error: --set expects key=value, got '%s'\n", kv.c_str());
      return KPF_ERR_USAGE;
    }
    const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    if (auto s = kpf_config_set(cfg.ptr, key.c_str(), value.c_str()); s != KPF_OK) return fail(s);
  }

  std::string command;
  for (auto* sub : commands)
    if (sub->parsed()) command = sub->get_name();

  // calibrate rewrites the config it was given unless told otherwise.
  if (command == "calibrate" && !config_path.empty()) {
    size_t len = 0;
    char buf[4096];
    if (auto s = kpf_config_get(cfg.ptr, "output", buf, sizeof buf, &len); s != KPF_OK) return fail(s);
    if (len == 0)
      if (auto s = kpf_config_set(cfg.ptr, "output", config_path.c_str()); s != KPF_OK) return fail(s);
  }

  if (auto s = kpf_run(command.c_str(), cfg.ptr, print_line, nullptr); s != KPF_OK) return fail(s);
  return 0;
}
