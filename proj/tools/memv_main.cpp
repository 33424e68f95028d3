#include "memv/cli.hpp"

int main(int argc, char** argv) { return memv::cli_main(argc, argv); }
