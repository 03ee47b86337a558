#include "cli.hpp"

int main(int argc, char** argv) { return gwpam::cli::main_entry(argc, argv); }
