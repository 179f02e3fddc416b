#include "cli.hpp"

int main(int argc, char** argv) { return lkit::cli::run_cli(argc, argv); }
