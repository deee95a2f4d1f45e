#include "cli/app.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return valleyfinder::cli::run(argc, argv, std::cout, std::cerr);
}
