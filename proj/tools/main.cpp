#include <iostream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cli.hpp"

int main(int argc, char **argv)
{
    spdlog::set_default_logger(spdlog::stderr_color_st("threadrank"));
    spdlog::set_pattern("%l: %v");
    return threadrank::cli::run(argc, argv, std::cout, std::cerr);
}
