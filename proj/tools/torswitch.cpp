#include "torswitch/cli.hpp"

int main(int argc, char** argv) { return torswitch::run_cli(argc, argv); }
