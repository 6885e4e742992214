#include <iostream>

#include <CLI11.hpp>

#include "commands.h"
#include "fbstore/io.h"

int main(int argc, char** argv) {
  CLI::App app{"Fractional Brownian storage: decay rates, convergence metrics and simulation planning"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_version_flag("--version", std::string(fbstore::version()));
  app.require_subcommand(1);
  const auto commands = fbstore::cli::register_commands(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    for (const auto& cmd : commands) {
      if (cmd.app->parsed()) return cmd.run();
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
