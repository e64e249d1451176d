#include "msgd/cli.hpp"

int main(int argc, char** argv) { return msgd::cli_main(argc, argv); }
