// Copyright (c) 2026, The verifact authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include <unistd.h>

namespace verifact::testing {

inline std::filesystem::path fixture_path(std::string_view name) {
    return std::filesystem::path(VERIFACT_FIXTURE_DIR) / name;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

/// Golden file contents minus the single trailing newline editors add.
inline std::string golden(std::string_view name) {
    auto text = read_file(std::filesystem::path(VERIFACT_GOLDEN_DIR) / name);
    if (!text.empty() && text.back() == '\n') {
        text.pop_back();
    }
    return text;
}

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        path_ = std::filesystem::temp_directory_path() /
                ("verifact-test-" + std::to_string(::getpid()) + "-" + std::to_string(stamp) + "-" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

// Texts from the worked examples.
inline constexpr std::string_view kBanglalinkQuestion = "banglalink helpline number";
inline constexpr std::string_view kBanglalinkAnswer =
    "The helpline number for Banglalink customer service in Bangladesh is 111.";
inline constexpr std::string_view kBanglalinkReader =
    "The customer support phone number for Banglalink is 880 9 885 770/01911304121/121.";
inline constexpr std::string_view kNyquilQuestion = "how long nyquil kicks in";
inline constexpr std::string_view kNyquilAnswer = "Nyquil typically takes about 30 minutes to start taking effect.";
inline constexpr std::string_view kNyquilReader =
    "Nyquil takes approximately 20-40 minutes to kick in, depending on factors such as the person's weight, "
    "metabolism, resistance to medication, and how sick they are.";
inline constexpr std::string_view kCmaQuestion = "average pay of a cma in idaho";
inline constexpr std::string_view kCmaPassage =
    "That amount was a slight increase over the $115,290 average salary CMAs reported in 2012, and was 31 percent "
    "higher than the $88,196 average salary last year for those without CMA or CPA certification.";
inline constexpr std::string_view kCmaReader =
    "Based on the given passage, the average pay of a CMA in Idaho is approximately $119,869. This amount is a "
    "slight increase over the $115,290 average salary CMAs reported in 2012, and it is 31 percent higher than the "
    "$88,196 average salary last year for those without CMA or CPA certification.";

}  // namespace verifact::testing
