// CSV rows, JSON traces and saved results.
#pragma once

#include <string>
#include <vector>

#include "masr/driver.hpp"

namespace masr {

extern const char* const kCsvHeader;

std::string csv_row(const RunResult& r);
void write_csv(const std::string& path, const std::vector<RunResult>& results);

// Convergence traces, stage times and the robustness report of one run.
std::string trace_json(const RunResult& r);
// File stem shared by the trace and result files of one run.
std::string run_stem(const RunResult& r);

// Everything `verify` needs: the config, the seed and the final design.
std::string result_json(const RunConfig& cfg, const RunResult& r);
struct SavedResult {
  RunConfig config;
  RunResult result;
};
SavedResult load_result(const std::string& path);
SavedResult result_from_json_text(const std::string& text);

// Writes results.csv plus traces/<stem>.json and results/<stem>.json under dir.
void write_outputs(const std::string& dir, const RunConfig& cfg,
                   const std::vector<RunResult>& results);

}  // namespace masr
