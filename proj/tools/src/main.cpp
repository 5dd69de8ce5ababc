#include "superdiff_tools/cli.hpp"

int main(int argc, char** argv) { return superdiff::tools::run_cli(argc, argv); }
