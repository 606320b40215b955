#include "ambscatter/cli.hpp"

int main(int argc, char** argv) { return ambscatter::cli_main(argc, argv); }
