#include <iostream>

#include "nem/cli.hpp"

int main(int argc, char** argv) {
  return nem::parse_and_dispatch(argc, argv, std::cout, std::cerr);
}
