#pragma once

#include "kacov/inference.hpp"
#include "kacov/simulation.hpp"

#include <iosfwd>
#include <string>

namespace kacov {

// Exit codes: 0 success, 2 input error, 3 numerical error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumeric = 3;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

std::string test_result_json(const TestResult& r);

inline constexpr const char* kSimulateHeader =
    "scenario,method,kernel_x,kernel_y,inference,n,param,noise,reps,level,rejection_rate,seed,"
    "wall_time_s";

std::string simulate_csv_row(const SimResult& r, const KernelSpec& kx, const KernelSpec& ky,
                             bool timing);

// Values start, start + step, ... up to stop (inclusive within rounding).
std::vector<double> parse_grid(const std::string& text);

}  // namespace kacov
