#include "rankcorr_cli.hpp"

int main(int argc, char** argv) { return rankcorr::cli::run(argc, argv); }
