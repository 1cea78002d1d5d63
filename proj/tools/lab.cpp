#include "cocyclelab/lab.hpp"

int main(int argc, char** argv) {
  return cocyclelab::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
