#include "ddmt/cli.hpp"

int main(int argc, char** argv) { return ddmt::cli_main(argc, argv); }
