#include "contropt/cli.hpp"

int main(int argc, char** argv) { return contropt::cli_main(argc, argv); }
