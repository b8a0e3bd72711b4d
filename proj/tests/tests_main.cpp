// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <filesystem>

#include "test_support.hpp"

namespace test_support {

std::string temp_dir(const std::string& tag) {
    static std::atomic<int> counter{0};
    const auto dir = std::filesystem::temp_directory_path() /
                     ("handgeo_test_" + tag + "_" + std::to_string(counter++));
    std::filesystem::create_directories(dir);
    return dir.string();
}

}  // namespace test_support
