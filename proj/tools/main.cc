#include <iostream>
#include <string>
#include <vector>

#include "mvsearch/cli/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mvsearch::cli::Run(args, std::cin, std::cout, std::cerr);
}
