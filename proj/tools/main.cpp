#include <iostream>
#include <string>
#include <vector>

#include "tablesage/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return tablesage::run_cli(args, std::cout, std::cerr);
}
