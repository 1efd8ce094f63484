#include "thermoform/cli/commands.hpp"

int main(int argc, char** argv) { return thermoform::cli::run_cli(argc, argv); }
