#include "ibl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "ibl/datagen.hpp"

namespace ibl {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// References

References compute_references(const Dataset& data, bool with_fixed_point) {
  References refs;
  refs.l2 = unit_direction(solve_l2_margin(data).w);
  refs.linf = unit_direction(solve_linf_margin(data).w);
  if (with_fixed_point) {
    const FixedPointResult fp = fixed_point_iterate(data, SimplexVector::uniform(data.n()));
    refs.fp = unit_direction(fp.w_star);
  }
  return refs;
}

Json references_to_json(const References& refs) {
  auto opt = [](const std::optional<Vector>& v) { return v ? vector_to_json(*v) : Json(nullptr); };
  return Json{{"l2", opt(refs.l2)}, {"linf", opt(refs.linf)}, {"fp", opt(refs.fp)}};
}

References references_from_json(const Json& j) {
  auto opt = [&](const char* key) -> std::optional<Vector> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return vector_from_json(j[key]);
  };
  return References{opt("l2"), opt("linf"), opt("fp")};
}

// ---------------------------------------------------------------------------
// Tracking

Trajectory track(const RunResult& result, const Dataset& data, const RunConfig& cfg,
                 const References& refs) {
  const std::uint64_t per_epoch = steps_per_epoch(cfg, data);
  Trajectory traj;
  traj.records.reserve(result.checkpoints.size());
  for (const Checkpoint& cp : result.checkpoints) {
    TrajectoryRecord r;
    r.step = cp.t;
    r.epoch = cp.t / per_epoch;
    r.loss = loss_full(cp.w, data, cfg.loss);
    r.norm_l2 = cp.w.norm();
    r.norm_linf = cp.w.lpNorm<Eigen::Infinity>();
    if (r.norm_l2 > 0.0) {
      if (refs.l2) r.cos_l2 = cosine_similarity(cp.w, *refs.l2);
      if (refs.linf) r.cos_linf = cosine_similarity(cp.w, *refs.linf);
      if (refs.fp) r.cos_fp = cosine_similarity(cp.w, *refs.fp);
      r.normalized_linf_margin = normalized_linf_margin(cp.w, data);
    }
    traj.records.push_back(r);
  }
  return traj;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

void append_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void append_optional(std::string& out, const std::optional<double>& v) {
  out += ',';
  if (v) append_double(out, *v);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw ConfigError("CSV: bad number '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) throw ConfigError("CSV: bad integer '" + s + "'");
  return static_cast<std::uint64_t>(v);
}

std::optional<double> parse_optional(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_double(s);
}

}  // namespace

std::string trajectory_to_csv(const Trajectory& traj) {
  std::string out = kCsvHeader;
  out += "\r\n";
  for (const TrajectoryRecord& r : traj.records) {
    out += std::to_string(r.step);
    out += ',';
    out += std::to_string(r.epoch);
    out += ',';
    append_double(out, r.loss);
    out += ',';
    append_double(out, r.norm_l2);
    out += ',';
    append_double(out, r.norm_linf);
    append_optional(out, r.cos_l2);
    append_optional(out, r.cos_linf);
    append_optional(out, r.cos_fp);
    append_optional(out, r.normalized_linf_margin);
    out += "\r\n";
  }
  return out;
}

Trajectory trajectory_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  if (!next_line() || line != kCsvHeader) throw ConfigError("CSV: unexpected header");
  Trajectory traj;
  while (next_line()) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 9) throw ConfigError("CSV: expected 9 fields per row");
    TrajectoryRecord r;
    r.step = parse_u64(f[0]);
    r.epoch = parse_u64(f[1]);
    r.loss = parse_double(f[2]);
    r.norm_l2 = parse_double(f[3]);
    r.norm_linf = parse_double(f[4]);
    r.cos_l2 = parse_optional(f[5]);
    r.cos_linf = parse_optional(f[6]);
    r.cos_fp = parse_optional(f[7]);
    r.normalized_linf_margin = parse_optional(f[8]);
    traj.records.push_back(r);
  }
  return traj;
}

void emit_csv(const Trajectory& traj, const fs::path& path) {
  write_text_file(path, trajectory_to_csv(traj));
}

Curve curve_from_trajectory(const Trajectory& traj, const std::string& column, std::string label) {
  Curve c;
  c.label = std::move(label);
  for (const TrajectoryRecord& r : traj.records) {
    std::optional<double> v;
    if (column == "loss") v = r.loss;
    else if (column == "norm_l2") v = r.norm_l2;
    else if (column == "norm_linf") v = r.norm_linf;
    else if (column == "cos_l2") v = r.cos_l2;
    else if (column == "cos_linf") v = r.cos_linf;
    else if (column == "cos_fp") v = r.cos_fp;
    else if (column == "normalized_linf_margin") v = r.normalized_linf_margin;
    else throw ConfigError("unknown trajectory column: " + column);
    if (!v) continue;
    c.x.push_back(static_cast<double>(r.step) + 1.0);
    c.y.push_back(*v);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Parallel execution

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// Figure catalogue

namespace {

constexpr std::uint64_t kShortRun = 200'000;  // GR and shifted-diagonal data
constexpr std::uint64_t kLongRun = 1'000'000; // Gaussian data

RunConfig adam_config(Sampling sampling, std::size_t batch, double beta1, double beta2,
                      std::uint64_t steps) {
  RunConfig cfg;
  cfg.algo = Algo::adam;
  cfg.sampling = {sampling, batch};
  cfg.beta1 = beta1;
  cfg.beta2 = beta2;
  cfg.schedule = Schedule::polynomial(0.1, 0.8);
  cfg.steps = steps;
  return cfg;
}

RunConfig signum_config(Sampling sampling, std::size_t batch, double beta, std::uint64_t steps) {
  RunConfig cfg;
  cfg.algo = Algo::signum;
  cfg.sampling = {sampling, batch};
  cfg.beta1 = beta;
  cfg.schedule = Schedule::polynomial(0.1, 0.8);
  cfg.steps = steps;
  return cfg;
}

std::vector<CurveSpec> adam_sampling_curves(std::uint64_t steps, std::size_t n) {
  return {
      {"adam_full", "full-batch Adam", adam_config(Sampling::full_batch, n, 0.9, 0.95, steps)},
      {"adam_inc", "incremental Adam", adam_config(Sampling::incremental, 1, 0.9, 0.95, steps)},
      {"adam_rr", "random-reshuffle Adam", adam_config(Sampling::random_reshuffle, 1, 0.9, 0.95, steps)},
      {"adam_wr", "with-replacement Adam", adam_config(Sampling::with_replacement, 1, 0.9, 0.95, steps)},
  };
}

std::string beta_tag(double beta) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%g", beta);
  std::string s = buf;
  std::replace(s.begin(), s.end(), '.', 'p');
  return s;
}

std::string beta_text(double beta) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%g", beta);
  return buf;
}

const std::vector<std::string> kFigureNames = {"fig1",       "fig2",       "fig4",      "fig5",
                                               "fig6",       "appA_batch", "appA_beta1", "appA_beta2",
                                               "appB_gr",    "appB_signum"};

}  // namespace

const std::vector<std::string>& figure_names() { return kFigureNames; }

FigureSpec figure_spec(const std::string& name, const FigureOptions& opts) {
  FigureSpec spec;
  spec.name = name;
  constexpr std::size_t kGaussianN = 10;
  const PanelSpec p_l2{"cos_l2", "cos_l2", "cosine similarity to the l2 max-margin direction"};
  const PanelSpec p_linf{"cos_linf", "cos_linf", "cosine similarity to the l-inf max-margin direction"};
  const PanelSpec p_fp{"cos_fp", "cos_fp", "cosine similarity to the fixed-point direction"};

  if (name == "fig1") {
    spec.source = DataSource::gaussian;
    spec.curves = adam_sampling_curves(kLongRun, kGaussianN);
    spec.panels = {p_l2, p_linf};
  } else if (name == "fig2") {
    spec.source = DataSource::gr;
    spec.curves = adam_sampling_curves(kShortRun, 4);
    RunConfig gd;
    gd.algo = Algo::gd;
    gd.sampling = {Sampling::full_batch, 4};
    gd.schedule = Schedule::constant(0.1);
    gd.steps = kShortRun;
    spec.curves.push_back({"gd", "GD", gd});
    spec.panels = {p_l2, p_linf};
  } else if (name == "fig4") {
    spec.source = DataSource::gaussian;
    spec.curves = adam_sampling_curves(kLongRun, kGaussianN);
    spec.curves.erase(spec.curves.begin());  // mini-batch variants only
    RunConfig proxy;
    proxy.algo = Algo::adamproxy;
    proxy.sampling = {Sampling::full_batch, kGaussianN};
    proxy.schedule = Schedule::polynomial(0.1, 0.8);
    proxy.steps = kLongRun;
    spec.curves.push_back({"adamproxy", "AdamProxy", proxy});
    spec.panels = {p_l2, p_fp};
  } else if (name == "fig5") {
    spec.source = DataSource::shifted_diagonal;
    spec.curves = adam_sampling_curves(kShortRun, 4);
    spec.panels = {p_l2, p_linf};
  } else if (name == "fig6") {
    spec.source = DataSource::gaussian;
    spec.curves.push_back({"signum_full", "full-batch Signum",
                           signum_config(Sampling::full_batch, kGaussianN, 0.99, kLongRun)});
    for (std::size_t b : {5, 2, 1}) {
      spec.curves.push_back({"signum_inc_b" + std::to_string(b), "incremental Signum, b=" + std::to_string(b),
                             signum_config(Sampling::incremental, b, 0.99, kLongRun)});
    }
    spec.panels = {p_l2, p_linf};
  } else if (name == "appA_batch") {
    spec.source = DataSource::gaussian;
    for (std::size_t b : {1, 2, 5, 10}) {
      spec.curves.push_back({"adam_inc_b" + std::to_string(b), "incremental Adam, b=" + std::to_string(b),
                             adam_config(Sampling::incremental, b, 0.9, 0.95, kLongRun)});
    }
    spec.panels = {p_l2, p_linf};
  } else if (name == "appA_beta1") {
    spec.source = DataSource::gaussian;
    for (double b1 : {0.9, 0.5, 0.1}) {
      spec.curves.push_back({"adam_inc_beta1_" + beta_tag(b1), "incremental Adam, beta1=" + beta_text(b1),
                             adam_config(Sampling::incremental, 1, b1, 0.95, kLongRun)});
    }
    spec.panels = {p_l2, p_linf};
  } else if (name == "appA_beta2") {
    spec.source = DataSource::gaussian;
    for (double b2 : {0.9, 0.5, 0.1}) {
      spec.curves.push_back({"adam_inc_beta2_" + beta_tag(b2), "incremental Adam, beta2=" + beta_text(b2),
                             adam_config(Sampling::incremental, 1, 0.1, b2, kLongRun)});
    }
    spec.panels = {p_l2, p_linf};
  } else if (name == "appB_gr") {
    spec.source = DataSource::gr;
    const std::pair<double, double> betas[] = {{0.1, 0.1}, {0.5, 0.5}, {0.9, 0.95}};
    for (const auto& [b1, b2] : betas) {
      spec.curves.push_back({"adam_inc_" + beta_tag(b1) + "_" + beta_tag(b2),
                             "incremental Adam, (" + beta_text(b1) + ", " + beta_text(b2) + ")",
                             adam_config(Sampling::incremental, 1, b1, b2, kShortRun)});
    }
    spec.panels = {p_l2, p_linf};
  } else if (name == "appB_signum") {
    spec.source = DataSource::gaussian;
    for (std::size_t b : {1, 2, 5, 10}) {
      for (double beta : {0.5, 0.9, 0.95, 0.99}) {
        spec.curves.push_back({"signum_inc_b" + std::to_string(b) + "_beta" + beta_tag(beta),
                               "Signum, b=" + std::to_string(b) + ", beta=" + beta_text(beta),
                               signum_config(Sampling::incremental, b, beta, kLongRun)});
      }
    }
    spec.panels = {p_linf};
  } else {
    throw ConfigError("unknown figure: " + name);
  }

  if (spec.source == DataSource::gaussian) spec.data_seed = opts.data_seed;
  for (CurveSpec& c : spec.curves) {
    c.config.seed = opts.seed;
    if (opts.steps) c.config.steps = *opts.steps;
  }
  return spec;
}

Dataset figure_dataset(const FigureSpec& spec) {
  switch (spec.source) {
    case DataSource::gaussian: return gen_gaussian(10, 50, spec.data_seed);
    case DataSource::gr: return gr_reference_dataset();
    case DataSource::shifted_diagonal: return shifted_diagonal_reference_dataset();
  }
  throw ConfigError("unknown data source");
}

// ---------------------------------------------------------------------------
// Figure runs

namespace {

Json options_to_json(const FigureOptions& opts) {
  return Json{{"seed", opts.seed},
              {"data_seed", opts.data_seed},
              {"steps", opts.steps ? Json(*opts.steps) : Json(nullptr)}};
}

FigureOptions options_from_json(const Json& j) {
  FigureOptions opts;
  opts.seed = j.value("seed", opts.seed);
  opts.data_seed = j.value("data_seed", opts.data_seed);
  if (j.contains("steps") && !j["steps"].is_null()) opts.steps = j["steps"].get<std::uint64_t>();
  return opts;
}

bool is_cosine_column(const std::string& column) { return column.rfind("cos_", 0) == 0; }

References cached_references(const Dataset& data, const Json& data_json, const fs::path& path) {
  if (fs::exists(path)) {
    try {
      const Json cached = read_json_file(path);
      if (cached.contains("dataset") && cached["dataset"] == data_json) {
        return references_from_json(cached.at("references"));
      }
    } catch (const Error&) {
      // Unreadable cache: fall through and recompute.
    }
  }
  References refs = compute_references(data);
  write_json_file(path, Json{{"dataset", data_json}, {"references", references_to_json(refs)}});
  return refs;
}

}  // namespace

FigureResult run_figure(const FigureSpec& spec, const FigureOptions& opts, const fs::path& out_dir,
                        std::size_t threads) {
  if (spec.curves.empty()) throw ConfigError("figure has no curves");
  fs::create_directories(out_dir);
  FigureResult out;

  const Dataset data = figure_dataset(spec);
  const Json data_json = dataset_to_json(data);
  save_dataset(out_dir / "dataset.json", data);
  out.files.push_back(out_dir / "dataset.json");

  const References refs = cached_references(data, data_json, out_dir / "refs.json");
  out.files.push_back(out_dir / "refs.json");

  std::vector<Trajectory> trajs(spec.curves.size());
  std::vector<std::string> errors(spec.curves.size());
  parallel_for(spec.curves.size(), threads, [&](std::size_t i) {
    const CurveSpec& c = spec.curves[i];
    try {
      const RunResult res = run(data, c.config);
      trajs[i] = track(res, data, c.config, refs);
      if (!res.ok) errors[i] = res.failure;
      emit_csv(trajs[i], out_dir / (c.id + ".csv"));
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  Json files = Json::array();
  files.push_back(Json{{"path", "dataset.json"}, {"kind", "dataset"}, {"seed", data_json["seed"]}});
  files.push_back(Json{{"path", "refs.json"}, {"kind", "references"}});
  for (std::size_t i = 0; i < spec.curves.size(); ++i) {
    const CurveSpec& c = spec.curves[i];
    if (!errors[i].empty()) out.failures.push_back(c.id + ": " + errors[i]);
    if (!fs::exists(out_dir / (c.id + ".csv"))) continue;
    out.files.push_back(out_dir / (c.id + ".csv"));
    files.push_back(Json{{"path", c.id + ".csv"},
                         {"kind", "trajectory"},
                         {"label", c.label},
                         {"config", run_config_to_json(c.config)},
                         {"seed", c.config.seed},
                         {"error", errors[i].empty() ? Json(nullptr) : Json(errors[i])}});
  }

  for (const PanelSpec& p : spec.panels) {
    std::vector<Curve> curves;
    for (std::size_t i = 0; i < spec.curves.size(); ++i) {
      Curve c = curve_from_trajectory(trajs[i], p.column, spec.curves[i].label);
      if (!c.x.empty()) curves.push_back(std::move(c));
    }
    if (curves.empty()) continue;
    Axes axes;
    axes.title = spec.name + ": " + p.title;
    axes.y_label = p.column;
    if (is_cosine_column(p.column)) {
      axes.y_min = 0.0;
      axes.y_max = 1.0;
    }
    const std::string file = spec.name + "_" + p.id + ".svg";
    emit_svg(curves, axes, out_dir / file);
    out.files.push_back(out_dir / file);
    files.push_back(Json{{"path", file}, {"kind", "panel"}, {"column", p.column}});
  }

  Json manifest;
  manifest["figure"] = spec.name;
  manifest["options"] = options_to_json(opts);
  manifest["dataset"] = Json{{"kind", std::string(to_string(data.kind))}, {"seed", data_json["seed"]}};
  manifest["files"] = std::move(files);
  manifest["failures"] = out.failures;
  manifest["note"] = "step counts are desk-scale choices; x axes show step + 1 on a log scale";
  write_json_file(out_dir / "manifest.json", manifest);
  out.files.push_back(out_dir / "manifest.json");
  return out;
}

FigureResult rerun_from_manifest(const fs::path& manifest_path, const fs::path& out_dir,
                                 std::size_t threads) {
  const Json manifest = read_json_file(manifest_path);
  if (!manifest.contains("figure") || !manifest.contains("options")) {
    throw ConfigError("manifest lacks \"figure\" or \"options\"");
  }
  const FigureOptions opts = options_from_json(manifest["options"]);
  return run_figure(figure_spec(manifest["figure"].get<std::string>(), opts), opts, out_dir, threads);
}

}  // namespace ibl
