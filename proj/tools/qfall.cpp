#include "qfall/cli_io.hpp"

int main(int argc, char** argv) { return qfall::cli_io::main_entry(argc, argv); }
