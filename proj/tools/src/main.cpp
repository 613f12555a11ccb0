#include <iostream>

#include "affseg_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return affseg::cli::run(args, std::cout, std::cerr);
}
