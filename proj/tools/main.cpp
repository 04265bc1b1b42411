#include "dmlm/cli.hpp"

int main(int argc, char** argv) { return dmlm::cli::run(argc, argv); }
