#include <iostream>
#include <string>
#include <vector>

#include "cait/cli.h"

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  std::vector<std::string> args(argv + 1, argv + argc);
  return cait::cli::Run(args, std::cin, std::cout, std::cerr);
}
