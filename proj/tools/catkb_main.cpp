#include "catkb/cli.hpp"

int main(int argc, char** argv) { return catkb::run_cli(argc, argv); }
