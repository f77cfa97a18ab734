#include "cli_app.hpp"

int main(int argc, char** argv) { return l2sp::cli_run(argc, argv); }
