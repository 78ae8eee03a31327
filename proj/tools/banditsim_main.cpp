#include "bandit/cli_app.hpp"

int main(int argc, char** argv) { return bandit::run_cli(argc, argv); }
