#pragma once

#include <string>
#include <utility>
#include <vector>

#include <lrb/couplings.hpp>

namespace lrb::cli {

// start:stop:count (inclusive, count >= 2) or a single value
std::vector<double> parse_time_grid(const std::string& token);

// lo:hi inclusive integers, or a single integer
std::pair<int, int> parse_r_range(const std::string& token);

// comma-separated alpha tokens, "inf" allowed
std::vector<Alpha> parse_alpha_list(const std::string& token);

// exit codes: 0 success, 1 property/compliance failure, 2 usage error
int run(int argc, const char* const* argv);

}  // namespace lrb::cli
