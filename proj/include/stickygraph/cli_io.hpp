#pragma once

// Configuration parsing, report persistence and plot files for the CLI.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "stickygraph/errors.hpp"
#include "stickygraph/experiments.hpp"

namespace stickygraph {

struct LinearizationSpec {
  double slope = 0;
  std::vector<double> eps{0.2, 0.1, 0.05};
};

/// Everything a CLI run needs: the experiment config plus the optional
/// per-experiment sections.
struct RunConfig {
  ExperimentConfig experiment;
  std::optional<FlatWallTuning> tuning;
  FitWindow window;
  LinearizationSpec linearization;
  BarrierParams barrier;
  bool barrier_given = false;  // section present (serialized only then)
  int barrier_probes = 8;
  BoundaryEqOptions boundary_eq;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const RunConfig& c);
std::string serialize_config(const RunConfig& c);

// ---- reports ----

struct CsvTable {
  std::string name;  // file stem
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};

struct Plot {
  std::string name;  // file stem
  std::string title;
  bool logx = false, logy = false;
  std::vector<PlotSeries> series;
  std::string annotation;
};

/// Report flattened for persistence.
struct ReportDoc {
  std::string name;
  nlohmann::json body;
  std::vector<CsvTable> tables;
  std::vector<Plot> plots;
};

ReportDoc to_doc(const GenericityReport& r);
ReportDoc to_doc(const AlternativeReport& r);
ReportDoc to_doc(const BarrierReport& r);
ReportDoc to_doc(const LinearizationReport& r);
ReportDoc to_doc(const BoundaryEqReport& r);

struct WriteOptions {
  bool force = false;
  std::optional<nlohmann::json> config_echo;
};

/// Writes <name>.json, the CSV tables and manifest.json (last) into out_dir.
/// Returns the written paths, manifest last.
std::vector<std::filesystem::path> write_report(const ReportDoc& doc, const std::filesystem::path& out_dir,
                                                const WriteOptions& opts = {});

/// SVG + CSV for each plot; returns the written paths (empty when nothing to plot).
std::vector<std::filesystem::path> emit_plot_data(const ReportDoc& doc, const std::filesystem::path& out_dir);

std::string render_svg(const Plot& p);
std::string csv_text(const CsvTable& t);
/// CRC-32 of a file, as 8 lowercase hex digits.
std::string file_checksum(const std::filesystem::path& p);

/// Numbers written with 17 significant digits.
std::string format_double(double v);

/// CLI entry point. 0: success, 1: an experiment assertion failed, 2: usage or config error.
int main_dispatch(int argc, const char* const* argv);

}  // namespace stickygraph
