#include "robusthedge/cli.hpp"

int main(int argc, char** argv) { return robusthedge::run_cli(argc, argv); }
