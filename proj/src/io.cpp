#include "ibl/io.hpp"

#include <fstream>
#include <sstream>

namespace ibl {

using Eigen::Index;

Json vector_to_json(const Vector& v) {
  Json j = Json::array();
  for (Index k = 0; k < v.size(); ++k) j.push_back(v[k]);
  return j;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw ConfigError("expected a JSON array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) throw ConfigError("expected a JSON array of numbers");
    v[static_cast<Index>(k)] = j[k].get<double>();
  }
  return v;
}

Json dataset_to_json(const Dataset& data) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < data.n(); ++i) rows.push_back(vector_to_json(data.point(i).transpose()));
  Json j;
  j["kind"] = std::string(to_string(data.kind));
  j["seed"] = data.seed ? Json(*data.seed) : Json(nullptr);
  j["n"] = data.n();
  j["d"] = data.d();
  j["x"] = std::move(rows);
  return j;
}

Dataset dataset_from_json(const Json& j) {
  try {
    const auto& rows = j.at("x");
    const std::size_t n = j.at("n").get<std::size_t>();
    const std::size_t d = j.at("d").get<std::size_t>();
    if (!rows.is_array() || rows.size() != n || n == 0 || d == 0) {
      throw ConfigError("dataset: \"x\" must hold n rows");
    }
    Matrix x(static_cast<Index>(n), static_cast<Index>(d));
    for (std::size_t i = 0; i < n; ++i) {
      const Vector row = vector_from_json(rows[i]);
      if (static_cast<std::size_t>(row.size()) != d) throw ConfigError("dataset: every row must have d entries");
      x.row(static_cast<Index>(i)) = row.transpose();
    }
    if (!x.allFinite()) throw ConfigError("dataset: entries must be finite");
    std::optional<std::uint64_t> seed;
    if (j.contains("seed") && !j["seed"].is_null()) seed = j["seed"].get<std::uint64_t>();
    const DatasetKind kind = j.contains("kind") ? dataset_kind_from_string(j["kind"].get<std::string>())
                                                : DatasetKind::custom;
    Dataset data = make_dataset(std::move(x), kind, seed);
    if (!is_separable(data)) {
      throw AssumptionError("linear-separability assumption violated: no w with x_i . w > 0 for all i");
    }
    return data;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("dataset JSON: ") + e.what());
  }
}

namespace {

Json kkt_to_json(const KktResiduals& r) {
  return Json{{"stationarity", r.stationarity},
              {"primal_feas", r.primal_feas},
              {"dual_feas", r.dual_feas},
              {"comp_slack", r.comp_slack}};
}

}  // namespace

Json margin_solution_to_json(const MarginSolution& sol) {
  Json j;
  j["w"] = vector_to_json(sol.w);
  j["lambda"] = vector_to_json(sol.lambda);
  j["support"] = sol.support;
  j["objective"] = sol.objective;
  j["kkt"] = kkt_to_json(sol.kkt);
  j["flags"] = Json{{"licq_violated", sol.licq_violated}, {"non_unique", sol.non_unique}};
  j["iterations"] = sol.iterations;
  return j;
}

Json linf_margin_to_json(const LinfMargin& sol) {
  return Json{{"w", vector_to_json(sol.w)},
              {"gamma_inf", sol.gamma_inf},
              {"flags", Json{{"non_unique", sol.non_unique}}}};
}

Json fixed_point_to_json(const FixedPointResult& res) {
  return Json{{"c_star", vector_to_json(res.c_star.values())},
              {"w_star", vector_to_json(res.w_star)},
              {"iterations", res.iterations},
              {"final_delta", res.final_delta},
              {"converged", res.converged},
              {"licq_warnings", res.licq_warnings}};
}

Json run_config_to_json(const RunConfig& cfg) {
  Json j;
  j["algo"] = std::string(to_string(cfg.algo));
  j["sampling"] = std::string(to_string(cfg.sampling.kind));
  j["batch_size"] = cfg.sampling.batch_size;
  j["loss"] = std::string(to_string(cfg.loss));
  j["beta1"] = cfg.beta1;
  j["beta2"] = cfg.beta2;
  j["schedule"] = Json{{"kind", cfg.schedule.kind == ScheduleKind::polynomial ? "polynomial" : "constant"},
                       {"eta0", cfg.schedule.eta0},
                       {"a", cfg.schedule.a}};
  j["steps"] = cfg.steps;
  j["seed"] = cfg.seed;
  j["w0"] = cfg.w0.size() == 0 ? Json(nullptr) : vector_to_json(cfg.w0);
  j["cadence"] = Json{{"dense_until", cfg.cadence.dense_until},
                      {"factor", cfg.cadence.factor},
                      {"every", cfg.cadence.every}};
  return j;
}

RunConfig run_config_from_json(const Json& j) {
  RunConfig cfg;
  try {
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");
    if (j.contains("algo")) cfg.algo = algo_from_string(j["algo"].get<std::string>());
    if (j.contains("sampling")) cfg.sampling.kind = sampling_from_string(j["sampling"].get<std::string>());
    if (j.contains("batch_size")) cfg.sampling.batch_size = j["batch_size"].get<std::size_t>();
    if (j.contains("loss")) cfg.loss = loss_kind_from_string(j["loss"].get<std::string>());
    if (j.contains("beta1")) cfg.beta1 = j["beta1"].get<double>();
    if (j.contains("beta2")) cfg.beta2 = j["beta2"].get<double>();
    if (j.contains("schedule")) {
      const Json& s = j["schedule"];
      const std::string kind = s.value("kind", std::string("polynomial"));
      if (kind == "polynomial") {
        cfg.schedule = Schedule::polynomial(s.value("eta0", 0.1), s.value("a", 0.8));
      } else if (kind == "constant") {
        cfg.schedule = Schedule::constant(s.value("eta0", 0.1));
      } else {
        throw ConfigError("unknown schedule kind: " + kind);
      }
    }
    if (j.contains("steps")) cfg.steps = j["steps"].get<std::uint64_t>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("w0") && !j["w0"].is_null()) cfg.w0 = vector_from_json(j["w0"]);
    if (j.contains("cadence")) {
      const Json& c = j["cadence"];
      cfg.cadence.dense_until = c.value("dense_until", cfg.cadence.dense_until);
      cfg.cadence.factor = c.value("factor", cfg.cadence.factor);
      cfg.cadence.every = c.value("every", cfg.cadence.every);
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("run config JSON: ") + e.what());
  }
  validate(cfg.schedule);
  return cfg;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

Json read_json_file(const std::filesystem::path& path) {
  try {
    return Json::parse(read_text_file(path));
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

Dataset load_dataset(const std::filesystem::path& path) { return dataset_from_json(read_json_file(path)); }

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
  write_json_file(path, dataset_to_json(data));
}

}  // namespace ibl
