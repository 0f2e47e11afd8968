#include "rfsr/harness/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "rfsr/errors.hpp"

namespace rfsr::harness {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::string out = kResultsHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += r.n > 0 ? std::to_string(r.n) : std::string();
    out += ',';
    out += r.M > 0 ? std::to_string(r.M) : std::string();
    out += ',';
    out += r.T > 0 ? std::to_string(r.T) : std::string();
    out += ',';
    out += std::isnan(r.lambda) ? std::string() : format_double(r.lambda);
    out += ',';
    out += std::to_string(r.rep);
    out += ',';
    out += r.metric;
    out += ',';
    out += format_double(r.value);
    out += '\n';
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw InvalidArgument("write failed for '" + path.string() + "'");
}

void write_outputs(const std::filesystem::path& dir, const ExperimentPlan& plan,
                   const ExperimentResult& result) {
  std::filesystem::create_directories(dir);
  write_text(dir / "results.csv", results_csv(result.rows));
  write_text(dir / "plan.resolved.json", plan_to_json(plan).dump(2) + "\n");
  if (plan.write_summary) write_text(dir / "summary.json", result.summary.dump(2) + "\n");
  for (const auto& [name, text] : result.tables) write_text(dir / name, text);
}

}  // namespace rfsr::harness
