#include <iostream>
#include <vector>

#include "rrmfem/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return rrm::run_cli(args, std::cout, std::cerr);
}
