#include "thermopath/cli.hpp"

int main(int argc, char** argv) { return thermo::cli::main(argc, argv); }
