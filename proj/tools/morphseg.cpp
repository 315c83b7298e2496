#include <iostream>

#include "morphseg/cli/cli.hpp"

int main(int argc, char** argv) {
  return morphseg::cli::run(argc, argv, std::cout, std::cerr);
}
