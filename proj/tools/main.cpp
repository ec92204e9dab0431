#include "vrsp/cli.hpp"

int main(int argc, char** argv) { return vrsp::run_cli(argc, argv); }
