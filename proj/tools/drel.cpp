#include "drel/cli.hpp"

int main(int argc, char** argv) { return drel::cli::run_subcommand(argc, argv); }
