#include "coex/cli.hpp"

int main(int argc, char** argv) {
  return coex::cli_main(argc, argv);
}
