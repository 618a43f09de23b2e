#include <exception>
#include <iostream>

#include "ktsafe/cli.hpp"

int main(int argc, char** argv) {
  try {
    return ktsafe::cli_run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
