#include "epsweep/cli.hpp"

int main(int argc, char** argv) { return epsweep::cli::main(argc, argv); }
