#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rfsr/harness/experiments.hpp"

namespace rfsr::harness {

inline constexpr const char* kResultsHeader = "n,M,T,lambda,rep,metric,value";

/// Shortest text that round-trips a double (%.17g); "nan"/"inf" spelled out.
std::string format_double(double v);

/// results.csv contents, rows in the given order.
std::string results_csv(const std::vector<ResultRow>& rows);

/// Writes results.csv, summary.json, plan.resolved.json and any extra tables
/// into `dir` (created if needed).
void write_outputs(const std::filesystem::path& dir, const ExperimentPlan& plan,
                   const ExperimentResult& result);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace rfsr::harness
