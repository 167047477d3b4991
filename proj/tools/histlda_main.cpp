#include <iostream>
#include <string>
#include <vector>

#include "histlda/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return histlda::cli::run(args, std::cout, std::cerr);
}
