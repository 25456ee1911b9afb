#include "xcity/cli.hpp"

int main(int argc, char** argv) { return xcity::run_cli(argc, argv); }
