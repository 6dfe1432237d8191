#include "fwi/cli.hpp"

int main(int argc, char** argv) { return fwi::cli_main(argc, argv); }
