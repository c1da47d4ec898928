#include "sqz/cli.hpp"

int main(int argc, char** argv) { return sqz::cli::run(argc, argv); }
