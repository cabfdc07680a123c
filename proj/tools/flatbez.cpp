#include "flatbez/cli.hpp"

int main(int argc, char** argv) { return flatbez::cli::run(argc, argv); }
