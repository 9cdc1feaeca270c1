#include "adinav/cli.hpp"

int main(int argc, char** argv) { return adinav::cli::run(argc, argv); }
