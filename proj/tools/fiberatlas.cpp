#include <iostream>

#include "fiberatlas/cli/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return fiberatlas::cli::run(std::move(args), std::cout, std::cerr);
}
