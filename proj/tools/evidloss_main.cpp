#include "evidloss/cli.hpp"

int main(int argc, char** argv) { return evidloss::run_cli(argc, argv); }
