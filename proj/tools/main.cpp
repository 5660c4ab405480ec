#include <iostream>
#include <string>
#include <vector>

#include "radcal/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return radcal::cli::run(args, std::cout, std::cerr);
}
