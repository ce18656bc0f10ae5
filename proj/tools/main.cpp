#include <iostream>

#include "wavecollapse/cli.hpp"

int main(int argc, char** argv) {
  return wavecollapse::run_cli(argc, argv, std::cout, std::cerr);
}
