#include "softmps_cli.hpp"

int main(int argc, char** argv) { return softmps::cli::run(argc, argv); }
