// mieforce: cross-section sweeps, forces, certification runs and the fig1 preset.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 certification failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mieforce/cli/commands.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitCertify = 4;

struct Flags {
  std::string config;
  mieforce::cli::Overrides overrides;
};

void add_common(CLI::App* cmd, Flags& f, bool needs_config) {
  auto* c = cmd->add_option("--config", f.config, "TOML run configuration");
  if (needs_config) c->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", f.overrides.out, "output CSV path (default: stdout)");
  cmd->add_option("--threads", f.overrides.threads, "worker threads (default: $MIEFORCE_THREADS or all cores)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--bandwidth-unit", f.overrides.bandwidth_unit, "how the squeezing bandwidth is read")
      ->check(CLI::IsMember({"rad_s", "hz"}));
  cmd->add_option("--truncation", f.overrides.truncation, "multipole truncation: auto or fixed:N");
}

template <class Write>
void emit(const std::string& path, Write&& write) {
  if (path.empty()) {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw mieforce::ConfigError("cannot open output file '" + path + "'");
  write(os);
  if (!os) throw mieforce::ConfigError("failed writing '" + path + "'");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace mieforce;
  using namespace mieforce::cli;

  CLI::App app{"Mie scattering cross-sections and squeezed-vacuum radiation forces on spheres"};
  app.require_subcommand(1);
  Flags f;
  auto* cs = app.add_subcommand("cross-sections", "cross-section sweep to CSV");
  auto* force = app.add_subcommand("force", "drive, recoil and total force to CSV");
  auto* certify = app.add_subcommand("certify", "identity checks; exit 4 if any fails");
  auto* fig1 = app.add_subcommand("fig1", "preset sweep: eps = 12.11+0.1i, 1550 nm, a = 0.2..10 um");
  add_common(cs, f, true);
  add_common(force, f, true);
  add_common(certify, f, true);
  add_common(fig1, f, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    RunConfig cfg = fig1->parsed() && f.config.empty() ? fig1_config() : load_config(f.config);
    apply_overrides(cfg, f.overrides);
    const std::vector<std::string>& columns = cfg.columns;

    if (cs->parsed()) {
      const Table t = cmd_cross_sections(cfg).select(columns);
      emit(cfg.out_path, [&](std::ostream& os) { write_csv(os, t); });
    } else if (force->parsed()) {
      const Table t = cmd_force(cfg).select(columns);
      emit(cfg.out_path, [&](std::ostream& os) { write_csv(os, t); });
    } else if (fig1->parsed()) {
      const Table t = cmd_fig1(cfg).select(columns);
      emit(cfg.out_path, [&](std::ostream& os) { write_csv(os, t); });
    } else if (certify->parsed()) {
      const CertifyReport rep = cmd_certify(cfg);
      print_report(std::cout, rep);
      if (!cfg.out_path.empty()) emit(cfg.out_path, [&](std::ostream& os) { write_report_csv(os, rep); });
      return rep.passed() ? 0 : kExitCertify;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DegenerateInputError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const AccuracyError& e) {
    std::cerr << "accuracy error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return 0;
}
