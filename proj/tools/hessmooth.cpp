#include "hessmooth/cli.hpp"

int main(int argc, char** argv) { return hessmooth::run_cli(argc, argv); }
