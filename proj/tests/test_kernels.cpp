#include "nhssh/errors.hpp"
#include "nhssh/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace nhssh;

TEST_CASE("serial and OpenMP maps agree bit for bit") {
    set_thread_count(4);
    const auto fn = [](std::size_t i) { return std::sin(0.1 * static_cast<double>(i)) * std::exp(-1e-3 * i); };
    CHECK(serial::map_indexed<double>(1000, fn) == omp::map_indexed<double>(1000, fn));
}

TEST_CASE("the lowest failing index is reported") {
    const auto fn = [](std::size_t i) -> int {
        if (i == 7 || i == 30) throw std::runtime_error(std::to_string(i));
        return static_cast<int>(i);
    };
    for (const auto exec : {Execution::Serial, Execution::Parallel}) {
        try {
            (void)map_indexed<int>(50, fn, exec);
            FAIL("expected a throw");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()) == "7");
        }
    }
}
