#pragma once

// Experiment orchestration: turns optimizer runs into cosine-similarity
// trajectories against reference directions, writes them as CSV and SVG,
// and reproduces the named figure experiments with a manifest.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ibl/datagen.hpp"
#include "ibl/io.hpp"

namespace ibl {

// ---------------------------------------------------------------------------
// Trajectories

/// Unit reference directions; any of them may be absent.
struct References {
  std::optional<Vector> l2;
  std::optional<Vector> linf;
  std::optional<Vector> fp;
};

/// l2 and l_inf max-margin directions and, if requested, the fixed-point
/// direction p(c*) from the uniform start. All normalised to unit l2 norm.
References compute_references(const Dataset& data, bool with_fixed_point = true);

Json references_to_json(const References& refs);
References references_from_json(const Json& j);

struct TrajectoryRecord {
  std::uint64_t step = 0;
  std::uint64_t epoch = 0;
  double loss = 0.0;
  double norm_l2 = 0.0;
  double norm_linf = 0.0;
  std::optional<double> cos_l2;
  std::optional<double> cos_linf;
  std::optional<double> cos_fp;
  std::optional<double> normalized_linf_margin;  // min_i x_i . w / |w|_inf

  bool operator==(const TrajectoryRecord&) const = default;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;

  bool operator==(const Trajectory&) const = default;
};

/// One record per checkpoint of `result`. Cosines and the normalised margin
/// are left empty while the iterate is zero.
Trajectory track(const RunResult& result, const Dataset& data, const RunConfig& cfg,
                 const References& refs);

/// Pinned CSV header; bump together with the column set.
inline constexpr const char* kCsvHeader =
    "step,epoch,loss,norm_l2,norm_linf,cos_l2,cos_linf,cos_fp,normalized_linf_margin";

/// Header plus one row per record; floats at 17 significant digits, empty
/// fields for missing values.
std::string trajectory_to_csv(const Trajectory& traj);
Trajectory trajectory_from_csv(const std::string& text);
void emit_csv(const Trajectory& traj, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// SVG line charts

struct Curve {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Axes {
  std::string title;
  std::string x_label = "iteration + 1";
  std::string y_label;
  bool log_x = true;
  std::optional<double> y_min;  // fixed range when both are set
  std::optional<double> y_max;
};

/// Standalone SVG with one polyline per curve and a legend. Throws
/// ConfigError for an empty curve list or a curve without points.
std::string render_svg(const std::vector<Curve>& curves, const Axes& axes);
void emit_svg(const std::vector<Curve>& curves, const Axes& axes, const std::filesystem::path& path);

/// Named trajectory column as a curve over x = step + 1. Records without the
/// value are skipped.
Curve curve_from_trajectory(const Trajectory& traj, const std::string& column, std::string label);

// ---------------------------------------------------------------------------
// Figures

enum class DataSource { gaussian, gr, shifted_diagonal };

struct CurveSpec {
  std::string id;     // file stem, unique within a figure
  std::string label;  // legend entry
  RunConfig config;
};

struct PanelSpec {
  std::string id;      // file stem
  std::string column;  // trajectory column plotted
  std::string title;
};

struct FigureSpec {
  std::string name;
  DataSource source = DataSource::gaussian;
  std::uint64_t data_seed = 0;  // Gaussian only
  std::vector<CurveSpec> curves;
  std::vector<PanelSpec> panels;
};

struct FigureOptions {
  std::uint64_t seed = 0;                  // run seed (random sampling orders)
  std::uint64_t data_seed = kCanonicalGaussianSeed;  // Gaussian dataset seed
  std::optional<std::uint64_t> steps;      // overrides every curve's step count
};

/// Names accepted by figure_spec.
const std::vector<std::string>& figure_names();

/// Throws ConfigError for an unknown name.
FigureSpec figure_spec(const std::string& name, const FigureOptions& opts = {});

Dataset figure_dataset(const FigureSpec& spec);

struct FigureResult {
  std::vector<std::filesystem::path> files;  // everything written, manifest last
  std::vector<std::string> failures;         // "<curve id>: <message>"
  bool ok() const { return failures.empty(); }
};

/// Runs every curve (in parallel on up to `threads` workers), writes
/// dataset.json, refs.json, one CSV per curve, one SVG per panel and
/// manifest.json into out_dir. Reference directions are read back from an
/// existing refs.json when it was made for the same dataset.
FigureResult run_figure(const FigureSpec& spec, const FigureOptions& opts,
                        const std::filesystem::path& out_dir, std::size_t threads = 1);

/// Re-runs the figure recorded in a manifest into out_dir.
FigureResult rerun_from_manifest(const std::filesystem::path& manifest_path,
                                 const std::filesystem::path& out_dir, std::size_t threads = 1);

/// Runs fn(i) for i in [0, count) on up to `threads` workers. The first
/// exception is rethrown after all workers finish.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace ibl
