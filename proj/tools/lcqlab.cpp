#include "lcq/cli.hpp"

int main(int argc, char** argv) { return lcq::run_cli(argc, argv); }
