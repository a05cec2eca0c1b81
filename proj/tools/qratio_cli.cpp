#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qratio/config.hpp"
#include "qratio/error.hpp"
#include "qratio/keyvalue.hpp"
#include "qratio/runner.hpp"
#include "qratio/units.hpp"

namespace io = qratio::io;
using Overrides = std::vector<std::pair<std::string, std::string>>;

namespace {

struct Common {
  std::string config;
  std::string preset;
  std::string out;
  unsigned threads = 1;
  std::string format;
  std::vector<std::string> sets;
  bool print_config = false;
};

// Context for error reports.
std::string g_scenario;

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "scenario file");
  cmd->add_option("--preset", c.preset, "preset name");
  cmd->add_option("--out", c.out, "output directory for data files and the manifest");
  cmd->add_option("--threads", c.threads, "worker threads (batch mode)")->check(CLI::PositiveNumber);
  cmd->add_option("--format", c.format, "table format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--set", c.sets, "override a parameter, key=value");
  cmd->add_flag("--print-config", c.print_config, "print the canonical config and exit");
}

// "pi/4" -> "pi/4 rad"; values that already carry a unit pass through.
std::string angle_text(const std::string& value) {
  std::string out;
  for (const auto& item : qratio::split_list(value)) {
    if (!out.empty()) out += ", ";
    try {
      qratio::parse_number_expression(item);
      out += item + " rad";
    } catch (const qratio::DomainError&) {
      out += item;
    }
  }
  return out;
}

std::vector<std::string> split_colon(const std::string& s) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto colon = s.find(':', start);
    parts.push_back(s.substr(start, colon == std::string::npos ? std::string::npos : colon - start));
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  return parts;
}

io::ScenarioConfig build_config(std::string_view kind, const Common& c, Overrides overrides) {
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw qratio::ConfigError("--set expects key=value, got '" + s + "'");
    auto trim = [](std::string v) {
      while (!v.empty() && v.front() == ' ') v.erase(v.begin());
      while (!v.empty() && v.back() == ' ') v.pop_back();
      return v;
    };
    overrides.emplace_back(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
  if (!c.config.empty() && !c.preset.empty()) throw qratio::ConfigError("give --config or --preset, not both");
  std::optional<io::ScenarioConfig> base;
  if (!c.config.empty()) base = io::load_config_file(c.config);
  if (!c.preset.empty()) base = io::parse_config(io::preset_text(c.preset));
  io::ScenarioConfig cfg;
  if (base) {
    cfg = overrides.empty() ? *base : io::with_overrides(*base, overrides);
  } else {
    std::string text = "kind = " + std::string(kind) + "\n";
    for (const auto& [k, v] : overrides) text += k + " = " + v + "\n";
    cfg = io::parse_config(text);
  }
  g_scenario = std::string(io::kind_name(cfg.kind)) + "/" + cfg.mode;
  if (!kind.empty() && io::kind_name(cfg.kind) != kind) {
    throw qratio::ConfigError("the " + std::string(kind) + " command got a " + std::string(io::kind_name(cfg.kind)) +
                              " scenario; use 'run' for any kind");
  }
  return cfg;
}

int execute(const io::ScenarioConfig& cfg, const Common& c) {
  if (c.print_config) {
    std::cout << io::serialize_config(cfg);
    return 0;
  }
  io::RunOptions opt;
  if (!c.format.empty()) opt.format = io::format_from_name(c.format);
  const std::string dir = c.out.empty() ? cfg.output_dir : c.out;
  if (dir.empty()) {
    std::cout << io::execute(cfg, opt).primary;
    return 0;
  }
  const auto start = std::chrono::steady_clock::now();
  const auto output = io::execute(cfg, opt);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  io::write_run(dir, cfg, output, wall);
  std::cout << output.primary;
  return 0;
}

void report_error(const std::string& kind, const std::string& message, int line = 0,
                  std::optional<double> suggested_dt = std::nullopt) {
  nlohmann::ordered_json j{{"error", kind}, {"message", message}};
  if (!g_scenario.empty()) j["scenario"] = g_scenario;
  if (line > 0) j["line"] = line;
  if (suggested_dt) j["suggested_dt"] = *suggested_dt;
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum ratio toolkit: wave-packet, spin, Stern-Gerlach, tunneling, Talbot and decoherence scenarios"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(QRATIO_VERSION));

  Common common;
  Overrides flags;
  auto flag = [&](CLI::App* cmd, const std::string& name, const std::string& key, const std::string& help,
                  bool angle = false) {
    cmd->add_option_function<std::string>(
        name, [&flags, key, angle](const std::string& v) { flags.emplace_back(key, angle ? angle_text(v) : v); },
        help);
  };

  auto* ratio = app.add_subcommand("ratio", "quantum ratio Q = R_q / L_0");
  add_common(ratio, common);
  flag(ratio, "--experiment", "experiments", "catalog experiment names, comma separated");

  auto* diffuse = app.add_subcommand("diffuse", "doubling time of free Gaussian packets");
  add_common(diffuse, common);
  flag(diffuse, "--width", "width", "initial width, e.g. '1 um'");
  flag(diffuse, "--particle", "particles", "catalog names, comma separated");

  auto* spin = app.add_subcommand("spin-dist", "J_z distribution of a spin coherent state");
  add_common(spin, common);
  flag(spin, "--j", "j", "spin, e.g. 13/2");
  flag(spin, "--theta", "theta", "polar angle(s), radians unless a unit is given", true);
  flag(spin, "--phi", "phi", "azimuth, radians unless a unit is given", true);
  flag(spin, "--method", "mode", "exact or stirling");
  flag(spin, "--min-weight", "min_weight", "omit rows below this weight");

  auto* sg = app.add_subcommand("sg", "Stern-Gerlach spinor dynamics");
  add_common(sg, common);
  flag(sg, "--mode", "mode", "decoupled, coupled or bands");

  std::string barrier, sweep;
  auto* tunnel = app.add_subcommand("tunnel", "WKB and transfer-matrix tunneling, 2D scenarios");
  add_common(tunnel, common);
  tunnel->add_option("--barrier", barrier, "rectangular:<height>:<full width> or gaussian:<height>:<sigma>");
  tunnel->add_option("--energy-sweep", sweep, "<lo>:<hi>:<n>, e.g. '0.1 eV:1.9 eV:19'");
  flag(tunnel, "--mass", "mass", "particle mass (sweep), default electron");
  flag(tunnel, "--mode", "mode", "sweep, pure or decohered");

  auto* talbot = app.add_subcommand("talbot", "Talbot carpets and Talbot-Lau scans");
  add_common(talbot, common);
  flag(talbot, "--mode", "mode", "carpet or lau");

  auto* decohere = app.add_subcommand("decohere", "position decoherence of density matrices");
  add_common(decohere, common);
  flag(decohere, "--mode", "mode", "packets, sg or timescales");

  auto* run = app.add_subcommand("run", "run any scenario file or preset");
  add_common(run, common);

  std::vector<std::string> batch_inputs;
  auto* batch = app.add_subcommand("batch", "run several configs or presets in a work pool");
  batch->add_option("inputs", batch_inputs, "config files or preset names")->required();
  batch->add_option("--out", common.out, "root directory; each run gets its own subdirectory")->required();
  batch->add_option("--threads", common.threads, "worker threads")->check(CLI::PositiveNumber);
  batch->add_option("--format", common.format, "table format")->check(CLI::IsMember({"csv", "json"}));

  auto* presets = app.add_subcommand("presets", "list preset names");
  std::string verify_dir;
  auto* verify = app.add_subcommand("verify", "check the checksums of a run directory");
  verify->add_option("dir", verify_dir, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    report_error("usage", e.what());
    return 2;
  }

  try {
    if (presets->parsed()) {
      for (const auto& n : io::preset_names()) std::cout << n << "\n";
      return 0;
    }
    if (verify->parsed()) {
      const auto bad = io::verify_manifest(verify_dir);
      nlohmann::ordered_json j{{"dir", verify_dir}, {"ok", bad.empty()}, {"mismatched", bad}};
      std::cout << j.dump() << "\n";
      return bad.empty() ? 0 : 1;
    }
    if (batch->parsed()) {
      std::vector<io::ScenarioConfig> configs;
      for (const auto& in : batch_inputs) {
        std::error_code ec;
        configs.push_back(std::filesystem::is_regular_file(in, ec) ? io::load_config_file(in)
                                                                   : io::parse_config(io::preset_text(in)));
      }
      io::RunOptions opt;
      if (!common.format.empty()) opt.format = io::format_from_name(common.format);
      const auto items = io::run_batch(configs, common.out, common.threads, opt);
      auto j = nlohmann::ordered_json::array();
      bool ok = true;
      for (std::size_t i = 0; i < items.size(); ++i) {
        nlohmann::ordered_json e{{"input", batch_inputs[i]}, {"dir", items[i].dir.string()}};
        if (items[i].manifest) {
          e["status"] = "ok";
        } else {
          ok = false;
          e["status"] = "failed";
          e["error"] = items[i].error_kind;
          e["message"] = items[i].error;
        }
        j.push_back(e);
      }
      std::cout << j.dump(2) << "\n";
      return ok ? 0 : 1;
    }

    if (tunnel->parsed()) {
      if (!barrier.empty()) {
        const auto p = split_colon(barrier);
        if (p.size() != 3 || (p[0] != "rectangular" && p[0] != "gaussian")) {
          throw qratio::ConfigError("--barrier expects rectangular:<height>:<width> or gaussian:<height>:<sigma>");
        }
        flags.emplace_back("barrier", p[0]);
        flags.emplace_back("height", p[1]);
        flags.emplace_back(p[0] == "rectangular" ? "width" : "sigma", p[2]);
      }
      if (!sweep.empty()) {
        const auto p = split_colon(sweep);
        if (p.size() != 3) throw qratio::ConfigError("--energy-sweep expects <lo>:<hi>:<n>");
        flags.emplace_back("mode", "sweep");
        flags.emplace_back("energy_min", p[0]);
        flags.emplace_back("energy_max", p[1]);
        flags.emplace_back("energy_points", p[2]);
      }
      const bool has_mass = std::any_of(flags.begin(), flags.end(), [](const auto& f) { return f.first == "mass"; });
      if (common.config.empty() && common.preset.empty() && !has_mass) {
        flags.emplace_back("mass", "0.51099895 MeV/c2");
      }
    }

    struct Entry {
      CLI::App* cmd;
      std::string_view kind;
    };
    for (const Entry e : {Entry{ratio, "ratio"}, Entry{diffuse, "diffuse"}, Entry{spin, "spin-dist"}, Entry{sg, "sg"},
                          Entry{tunnel, "tunnel"}, Entry{talbot, "talbot"}, Entry{decohere, "decohere"},
                          Entry{run, ""}}) {
      if (!e.cmd->parsed()) continue;
      if (e.kind.empty() && common.config.empty() && common.preset.empty()) {
        throw qratio::ConfigError("run needs --config or --preset");
      }
      return execute(build_config(e.kind, common, flags), common);
    }
  } catch (const qratio::ConfigError& e) {
    report_error(e.kind(), e.what(), e.line());
    return 1;
  } catch (const qratio::StepSizeError& e) {
    report_error(e.kind(), e.what(), 0, e.suggested_dt());
    return 1;
  } catch (const qratio::Error& e) {
    report_error(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    report_error("error", e.what());
    return 1;
  }
  return 0;
}
