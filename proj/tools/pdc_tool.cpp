// pdc-tool: design, simulate, sweep, reconstruct, rates.
// Exit codes: 0 ok, 2 bad configuration, 3 bad data.

#include <iostream>

#include "commands.hpp"
#include "pdc/dispersion.hpp"
#include "pdc/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Design and analysis of quasi-phase-matched down-conversion sources", "pdc-tool"};
  app.set_config("--config", "", "INI file with one [subcommand] section; flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);

  pdc::cli::Common common;
  app.add_option("--seed", common.seed, "Random seed")->capture_default_str();
  app.add_option("--out", common.out, "Output directory")->capture_default_str();

  pdc::cli::add_design(app, common);
  pdc::cli::add_simulate(app, common);
  pdc::cli::add_sweep(app, common);
  pdc::cli::add_reconstruct(app, common);
  pdc::cli::add_rates(app, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const pdc::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const pdc::RangeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const pdc::NoPhaseMismatch& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const pdc::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
