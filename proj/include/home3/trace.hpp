#pragma once

#include <filesystem>
#include <string>

#include "home3/record.hpp"

namespace home3 {

// Header pinned by the trace contract.
inline constexpr const char* kTraceHeader = "iter,loss,grad_norm,moment_gap,randomized";

// Floating-point values carry 17 significant digits so a parse of the emitted
// file reproduces the in-memory record exactly.
std::string format_double(double v);

void write_trace_csv(const std::filesystem::path& path, const RunRecord& rec);
RunRecord read_trace_csv(const std::filesystem::path& path);

void write_trace_json(const std::filesystem::path& path, const RunRecord& rec);
RunRecord read_trace_json(const std::filesystem::path& path);

}  // namespace home3
