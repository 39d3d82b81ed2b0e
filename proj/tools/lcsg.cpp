#include <iostream>

#include "lcsg/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return lcsg::run_cli(std::move(args), std::cout, std::cerr);
}
