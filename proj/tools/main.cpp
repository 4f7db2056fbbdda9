#include <string>
#include <vector>

#include "emshs/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return emshs::dispatch(args);
}
