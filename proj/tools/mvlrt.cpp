#include <iostream>
#include <string>
#include <vector>

#include "mvlrt/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mvlrt::run_cli(args, std::cout, std::cerr);
}
