#include "commands.hpp"

int main(int argc, char** argv) { return frameseg::cli::run(argc, argv); }
