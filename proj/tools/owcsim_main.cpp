#include "owcsim/cli.hpp"

int main(int argc, char** argv) { return owcsim::run_cli(argc, argv); }
