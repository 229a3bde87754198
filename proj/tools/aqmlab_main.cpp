#include "aqmlab/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return aqmlab::dispatch(argc, argv, std::cout, std::cerr);
}
