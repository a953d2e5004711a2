#include <iostream>
#include <string>
#include <vector>

#include "zenohl/io.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return zenohl::run_cli(args, std::cout, std::cerr);
}
