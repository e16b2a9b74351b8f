#include "hc/cli.hpp"

int main(int argc, char** argv) { return hc::cli::main_entry(argc, argv); }
