// Command-line front end: dataset generation and validation, single training
// runs, margin solves, the dual fixed-point iteration and figure runs.
//
// Exit codes: 0 success, 2 configuration/assumption error, 3 numeric failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ibl/datagen.hpp"
#include "ibl/fixedpoint.hpp"
#include "ibl/harness.hpp"
#include "ibl/io.hpp"

namespace fs = std::filesystem;
using namespace ibl;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("not a number: '" + item + "'");
    }
  }
  return out;
}

// "++++,+++-" -> N x d matrix of +-1.
Matrix parse_signs(const std::string& text) {
  std::vector<std::string> rows;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) rows.push_back(item);
  if (rows.empty() || rows[0].empty()) throw ConfigError("--signs must list rows like ++-,+-+");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw ConfigError("--signs rows must have equal length");
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      const char ch = rows[i][k];
      if (ch != '+' && ch != '-') throw ConfigError("--signs accepts only '+' and '-'");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = ch == '+' ? 1.0 : -1.0;
    }
  }
  return m;
}

std::size_t resolve_threads(std::size_t flag) {
  if (const char* env = std::getenv("IBL_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw ConfigError("IBL_THREADS must be a positive integer");
  }
  return flag == 0 ? 1 : flag;
}

void emit_json(const Json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_json_file(out, j);
  }
}

Json report_to_json(const ValidationReport& r) {
  Json j{{"nonzero", r.nonzero}, {"separable", r.separable}, {"gamma_inf", r.gamma_inf},
         {"licq", r.licq},       {"ok", r.ok()}};
  j["gr_structure"] = r.gr_structure ? Json(*r.gr_structure) : Json(nullptr);
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Implicit-bias experiments for Adam, AdamProxy and Signum on separable data"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may also follow the subcommand

  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::size_t threads = 1;
  app.add_option("--seed", seed, "Random seed (dataset draws, sampling orders)");
  app.add_option("--out-dir", out_dir, "Directory for generated files");
  app.add_option("--threads", threads, "Worker threads (IBL_THREADS overrides)");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a dataset");
  std::string kind = "gaussian", magnitudes, signs, values, gen_out;
  std::size_t n = 10, d = 50;
  double delta = 0.1, min_margin = 1e-3;
  bool seed_given = false;
  gen->add_option("--kind", kind, "gaussian | gr | shifted_diagonal")
      ->check(CLI::IsMember({"gaussian", "gr", "shifted_diagonal"}));
  gen->add_option("--n", n, "Number of points (gaussian)");
  gen->add_option("--d", d, "Dimension (gaussian)");
  gen->add_option("--magnitudes", magnitudes, "Comma-separated magnitudes (gr; omit with --signs for the reference set)");
  gen->add_option("--signs", signs, "Sign rows such as ++++,+++- (gr)");
  gen->add_option("--values", values, "Comma-separated increasing values (shifted_diagonal; omit for the reference set)");
  gen->add_option("--delta", delta, "Off-diagonal shift (shifted_diagonal)");
  gen->add_option("--min-margin", min_margin, "Minimum l_inf margin of an accepted draw (gaussian)");
  gen->add_option("--out", gen_out, "Output path (default <out-dir>/dataset.json)");
  gen->add_flag("--canonical-seed", seed_given, "Ignore --seed and use the canonical seed");

  // validate
  auto* val = app.add_subcommand("validate", "Check a dataset against the standing assumptions");
  std::string val_data;
  val->add_option("--data", val_data, "Dataset JSON")->required();

  // train
  auto* train = app.add_subcommand("train", "Run one optimizer and write its trajectory CSV");
  std::string train_data, train_config, train_out;
  std::optional<std::string> algo, sampling, loss;
  std::optional<std::size_t> batch;
  std::optional<double> beta1, beta2, eta0, power;
  std::optional<std::uint64_t> steps;
  bool constant_eta = false, no_fp = false;
  train->add_option("--data", train_data, "Dataset JSON")->required();
  train->add_option("--config", train_config, "Run config JSON (flags below override it)");
  train->add_option("--algo", algo, "adam | signum | signgd | gd | adamproxy");
  train->add_option("--sampling", sampling, "full_batch | incremental | random_reshuffle | with_replacement");
  train->add_option("--batch", batch, "Batch size");
  train->add_option("--loss", loss, "exponential | logistic");
  train->add_option("--beta1", beta1, "Adam beta1 / Signum beta");
  train->add_option("--beta2", beta2, "Adam beta2");
  train->add_option("--eta0", eta0, "Base learning rate");
  train->add_option("--a", power, "Schedule exponent");
  train->add_flag("--constant-eta", constant_eta, "Use a constant learning rate eta0");
  train->add_option("--steps", steps, "Number of steps");
  train->add_flag("--no-fixed-point", no_fp, "Skip the fixed-point reference direction");
  train->add_option("--out", train_out, "CSV path (default <out-dir>/trajectory.csv)");

  // margin
  auto* margin = app.add_subcommand("margin", "Solve a max-margin problem");
  std::string margin_data, norm = "l2", cvec, margin_out;
  double tol = 1e-12;
  margin->add_option("--data", margin_data, "Dataset JSON")->required();
  margin->add_option("--norm", norm, "l2 | linf | padam")->check(CLI::IsMember({"l2", "linf", "padam"}));
  margin->add_option("--c", cvec, "Comma-separated simplex vector for padam (default uniform)");
  margin->add_option("--tol", tol, "KKT tolerance");
  margin->add_option("--out", margin_out, "Output JSON (default stdout)");

  // fixed-point
  auto* fpc = app.add_subcommand("fixed-point", "Run the dual fixed-point iteration");
  std::string fp_data, fp_c0, fp_out;
  FixedPointOptions fp_opts;
  fpc->add_option("--data", fp_data, "Dataset JSON")->required();
  fpc->add_option("--c0", fp_c0, "Initial simplex vector (default uniform)");
  fpc->add_option("--thr", fp_opts.thr, "Stopping threshold on |c1 - c0|_2");
  fpc->add_option("--max-iter", fp_opts.max_iter, "Iteration cap");
  fpc->add_option("--out", fp_out, "Output JSON (default stdout)");

  // figure
  auto* fig = app.add_subcommand("figure", "Reproduce a figure experiment");
  std::string fig_name, manifest;
  std::optional<std::uint64_t> fig_steps;
  std::uint64_t data_seed = kCanonicalGaussianSeed;
  fig->add_option("name", fig_name, "Figure name")->check(CLI::IsMember(figure_names()));
  fig->add_option("--steps", fig_steps, "Override the step count of every curve");
  fig->add_option("--data-seed", data_seed, "Seed of the Gaussian dataset");
  fig->add_option("--from-manifest", manifest, "Re-run the experiment recorded in a manifest");
  fig->add_flag_callback("--list", [] {
    for (const auto& name : figure_names()) std::cout << name << "\n";
    std::exit(0);
  }, "List figure names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    const std::size_t nthreads = resolve_threads(threads);

    if (*gen) {
      Dataset data;
      if (kind == "gaussian") {
        data = gen_gaussian(n, d, seed_given ? kCanonicalGaussianSeed : seed, GaussianOptions{min_margin, 100});
      } else if (kind == "gr") {
        if (magnitudes.empty() != signs.empty()) throw ConfigError("gr needs both --magnitudes and --signs");
        data = magnitudes.empty() ? gr_reference_dataset() : gen_gr(parse_list(magnitudes), parse_signs(signs));
      } else {
        data = values.empty() ? shifted_diagonal_reference_dataset() : gen_shifted_diagonal(parse_list(values), delta);
      }
      const ValidationReport rep = validate(data);
      if (!rep.ok()) throw AssumptionError("generated dataset failed validation");
      const fs::path path = gen_out.empty() ? fs::path(out_dir) / "dataset.json" : fs::path(gen_out);
      save_dataset(path, data);
      std::cout << path.string() << "\n";
    } else if (*val) {
      // Report only: read the raw JSON so that invalid datasets are described
      // rather than rejected.
      const Json j = read_json_file(val_data);
      Dataset data;
      try {
        data.x = Matrix(j.at("n").get<Eigen::Index>(), j.at("d").get<Eigen::Index>());
        for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
          data.x.row(i) = vector_from_json(j.at("x").at(static_cast<std::size_t>(i))).transpose();
        }
        if (j.contains("kind")) data.kind = dataset_kind_from_string(j["kind"].get<std::string>());
      } catch (const Json::exception& e) {
        throw ConfigError(std::string("dataset JSON: ") + e.what());
      }
      const ValidationReport rep = validate(data);
      std::cout << report_to_json(rep).dump(2) << "\n";
      return rep.ok() ? 0 : kExitConfig;
    } else if (*train) {
      const Dataset data = load_dataset(train_data);
      RunConfig cfg = train_config.empty() ? RunConfig{} : run_config_from_json(read_json_file(train_config));
      if (train_config.empty()) cfg.seed = seed;
      if (app.get_option("--seed")->count() > 0) cfg.seed = seed;
      if (algo) cfg.algo = algo_from_string(*algo);
      if (sampling) cfg.sampling.kind = sampling_from_string(*sampling);
      if (batch) cfg.sampling.batch_size = *batch;
      if (cfg.sampling.kind == Sampling::full_batch) cfg.sampling.batch_size = data.n();
      if (loss) cfg.loss = loss_kind_from_string(*loss);
      if (beta1) cfg.beta1 = *beta1;
      if (beta2) cfg.beta2 = *beta2;
      if (constant_eta) cfg.schedule = Schedule::constant(eta0.value_or(cfg.schedule.eta0));
      if (eta0) cfg.schedule.eta0 = *eta0;
      if (power) cfg.schedule.a = *power;
      if (steps) cfg.steps = *steps;
      validate(cfg, data);
      const References refs = compute_references(data, !no_fp);
      const RunResult res = run(data, cfg);
      const fs::path path = train_out.empty() ? fs::path(out_dir) / "trajectory.csv" : fs::path(train_out);
      emit_csv(track(res, data, cfg, refs), path);
      write_json_file(fs::path(path).replace_extension(".config.json"), run_config_to_json(cfg));
      std::cout << path.string() << "\n";
      if (!res.ok) {
        std::cerr << "run aborted: " << res.failure << "\n";
        return kExitNumeric;
      }
    } else if (*margin) {
      const Dataset data = load_dataset(margin_data);
      QpOptions qp;
      qp.tol = tol;
      if (norm == "linf") {
        emit_json(linf_margin_to_json(solve_linf_margin(data)), margin_out);
      } else if (norm == "l2") {
        emit_json(margin_solution_to_json(solve_l2_margin(data, qp)), margin_out);
      } else {
        SimplexVector c = SimplexVector::uniform(data.n());
        if (!cvec.empty()) {
          const std::vector<double> vals = parse_list(cvec);
          c = SimplexVector(Eigen::Map<const Vector>(vals.data(), static_cast<Eigen::Index>(vals.size())));
        }
        emit_json(margin_solution_to_json(solve_p_adam(data, c, qp)), margin_out);
      }
    } else if (*fpc) {
      const Dataset data = load_dataset(fp_data);
      SimplexVector c0 = SimplexVector::uniform(data.n());
      if (!fp_c0.empty()) {
        const std::vector<double> vals = parse_list(fp_c0);
        c0 = SimplexVector(Eigen::Map<const Vector>(vals.data(), static_cast<Eigen::Index>(vals.size())));
      }
      const FixedPointResult res = fixed_point_iterate(data, c0, fp_opts);
      emit_json(fixed_point_to_json(res), fp_out);
    } else if (*fig) {
      FigureResult res;
      if (!manifest.empty()) {
        const std::string name = read_json_file(manifest).at("figure").get<std::string>();
        res = rerun_from_manifest(manifest, fs::path(out_dir) / name, nthreads);
      } else {
        if (fig_name.empty()) throw ConfigError("figure needs a name or --from-manifest");
        FigureOptions opts;
        opts.seed = seed;
        opts.data_seed = data_seed;
        opts.steps = fig_steps;
        res = run_figure(figure_spec(fig_name, opts), opts, fs::path(out_dir) / fig_name, nthreads);
      }
      for (const auto& f : res.files) std::cout << f.string() << "\n";
      for (const auto& f : res.failures) std::cerr << "failed: " << f << "\n";
      if (!res.ok()) return kExitNumeric;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return 0;
}
