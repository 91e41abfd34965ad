#include "shm/cli.hpp"

int main(int argc, char** argv) { return shm::cli::run(argc, argv); }
