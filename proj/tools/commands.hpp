#pragma once

#include <cstdint>
#include <string>

#include <CLI11.hpp>

namespace pdc::cli {

// Options shared by every subcommand.
struct Common {
  std::uint64_t seed = 1;
  std::string out = ".";
};

void add_design(CLI::App& app, const Common& common);
void add_simulate(CLI::App& app, const Common& common);
void add_sweep(CLI::App& app, const Common& common);
void add_reconstruct(CLI::App& app, const Common& common);
void add_rates(CLI::App& app, const Common& common);

} // namespace pdc::cli
