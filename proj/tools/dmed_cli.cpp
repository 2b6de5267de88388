#include "dmed/cli.hpp"

int main(int argc, char** argv) { return dmed::cli::run(argc, argv); }
