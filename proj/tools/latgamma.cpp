#include "latgamma/cli.hpp"

int main(int argc, char** argv) { return latgamma::run(argc, argv); }
