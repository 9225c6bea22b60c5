#include "stagetv/cli.hpp"

int main(int argc, char** argv) { return stagetv::cli_main(argc, argv); }
