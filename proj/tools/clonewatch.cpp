#include "clonewatch/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return clonewatch::cli::run(argc, argv, std::cout, std::cerr);
}
