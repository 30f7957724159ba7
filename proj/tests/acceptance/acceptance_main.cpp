// Runs every acceptance criterion and prints one line per criterion.

#include <cstdio>

#include "bkl/verify.hpp"

int main() {
    const auto results = bkl::verify::run_acceptance();
    int failed = 0;
    for (const auto& r : results) {
        std::printf("%s\n", bkl::verify::summary_line(r).c_str());
        if (!r.passed) ++failed;
    }
    std::printf("%zu criteria, %d failed\n", results.size(), failed);
    return failed == 0 ? 0 : 1;
}
