#include <CLI11.hpp>

#include "frugalmc/graph.hpp"

int main(int argc, char** argv) {
  CLI::App app{"distributed MSO model checking toolkit"};
  app.require_subcommand(1);
  CLI11_PARSE(app, argc, argv);
  return 2;
}
