#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpnls/asymptotics.hpp"
#include "dpnls/evolution.hpp"
#include "dpnls/functionals.hpp"
#include "dpnls/groundstate.hpp"
#include "dpnls/stability.hpp"

namespace dpnls {

using json = nlohmann::json;

/// Schema tag carried by every JSON output and accepted config.
inline constexpr int kFormatVersion = 1;
inline constexpr const char* kSoftwareVersion = "0.1.0";

/// 17 significant digits in scientific notation; nan/inf spelled out.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  /// Index of a header column; throws InvalidParams if absent.
  std::size_t column(const std::string& name) const;
  std::vector<double> numeric_column(const std::string& name) const;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

/// Pretty-printed with a trailing newline; `format_version` is added if missing.
void write_json(const std::filesystem::path& path, json doc);
json read_json(const std::filesystem::path& path);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

json to_json(const ModelParams& params);
ModelParams params_from_json(const json& j);
json to_json(const ShootingConfig& cfg);
ShootingConfig shooting_from_json(const json& j);
json to_json(const Norms& norms);
json to_json(const FunctionalReport& report);
json to_json(const TailModel& tail);
json to_json(const SolveInfo& info);
json to_json(const DecayFit& fit);
json to_json(const CriterionResult& c);
json to_json(const StraussMargin& m);

CsvTable profile_table(const RadialProfile& profile);
CsvTable sweep_table(const std::vector<SweepRow>& rows);
CsvTable limit_table(const LimitStudy& study);
CsvTable diagnostics_table(const EvolutionDiagnostics& diag);
CsvTable field_table(const WaveField& field);

}  // namespace dpnls
