#include "camp/cli.hpp"

int main(int argc, char** argv) { return camp::cli::run(argc, argv); }
