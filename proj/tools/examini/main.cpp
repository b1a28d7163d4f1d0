#include <iostream>

#include "examini/cli/cli.hpp"

int main(int argc, char** argv) {
  return examini::cli::dispatch({argv + 1, argv + argc}, std::cout, std::cerr);
}
