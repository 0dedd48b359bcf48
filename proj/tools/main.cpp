#include "pandexit_cli/cli.hpp"

int main(int argc, char** argv) { return pandexit::cli::run(argc, argv); }
