#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <spdlog/spdlog.h>

int main(int argc, char** argv)
{
    // expected warnings (uncalibrated factors, retries) would drown the report
    spdlog::set_level(spdlog::level::err);
    return doctest::Context(argc, argv).run();
}
