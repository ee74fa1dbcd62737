#include "preytaxis/cli/commands.hpp"

int main(int argc, char** argv) { return preytaxis::cli::main_entry(argc, argv); }
