#include <filesystem>
#include <regex>
#include <set>

#include <doctest.h>

#include "ibl/datagen.hpp"
#include "ibl/harness.hpp"

using namespace ibl;
namespace fs = std::filesystem;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ibl_test_harness_" + name);
  fs::remove_all(p);
  return p;
}

RunResult fake_result(std::initializer_list<Vector> ws) {
  RunResult r;
  std::uint64_t t = 0;
  for (const Vector& w : ws) r.checkpoints.push_back({t++, w});
  return r;
}

}  // namespace

TEST_CASE("track: cosines against references") {
  const Dataset gr = gr_reference_dataset();
  const References refs = compute_references(gr);
  Vector orth = Vector::Zero(4);
  // Orthogonal to the l_inf reference.
  orth[0] = refs.linf->y();
  orth[1] = -refs.linf->x();
  RunConfig cfg;
  const Trajectory tr = track(fake_result({Vector::Zero(4), *refs.l2 * 3.0, orth}), gr, cfg, refs);
  REQUIRE(tr.records.size() == 3);
  CHECK_FALSE(tr.records[0].cos_l2.has_value());
  CHECK(tr.records[0].loss == 1.0);
  CHECK(*tr.records[1].cos_l2 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(*tr.records[2].cos_linf) <= 1e-15);
}

TEST_CASE("CSV: pinned header, empty file, roundtrip") {
  CHECK(std::string(kCsvHeader) ==
        "step,epoch,loss,norm_l2,norm_linf,cos_l2,cos_linf,cos_fp,normalized_linf_margin");
  CHECK(trajectory_to_csv(Trajectory{}) == std::string(kCsvHeader) + "\r\n");

  Trajectory tr;
  TrajectoryRecord a;
  a.step = 0;
  a.loss = 1.0;
  TrajectoryRecord b;
  b.step = 17;
  b.epoch = 4;
  b.loss = 0.1 + 0.2;
  b.norm_l2 = 1.0 / 3.0;
  b.norm_linf = 2.0e-300;
  b.cos_l2 = -0.123456789012345678;
  b.cos_linf = 1.0;
  b.normalized_linf_margin = 11.5;
  tr.records = {a, b};
  const std::string text = trajectory_to_csv(tr);
  CHECK(trajectory_from_csv(text) == tr);
  CHECK(text.find("0.30000000000000004") != std::string::npos);
  CHECK_THROWS_AS(trajectory_from_csv("bad,header\r\n"), ConfigError);
}

TEST_CASE("SVG emitter") {
  Curve flat{"flat", {1, 10, 100}, {0.5, 0.5, 0.5}};
  const std::string one = render_svg({flat}, Axes{"t", "x", "y", true, 0.0, 1.0});
  CHECK(count(one, "<polyline") == 1);
  // A constant curve is drawn at a single y.
  const std::regex pts("points=\"([^\"]*)\"");
  std::smatch m;
  REQUIRE(std::regex_search(one, m, pts));
  const std::regex ycoord(",([0-9.]+)");
  std::set<std::string> ys;
  const std::string points = m[1];
  for (auto it = std::sregex_iterator(points.begin(), points.end(), ycoord); it != std::sregex_iterator(); ++it) {
    ys.insert((*it)[1]);
  }
  CHECK(ys.size() == 1);

  Curve rise{"rise & fall", {1, 1000}, {0.1, 0.9}};
  const std::string two = render_svg({flat, rise}, Axes{"t", "x", "y", true, 0.0, 1.0});
  CHECK(count(two, "<polyline") == 2);
  CHECK(two.find("rise &amp; fall") != std::string::npos);
  CHECK(count(two.substr(two.find("class=\"legend\"")), "<line") == 2);
  CHECK_THROWS_AS(render_svg({}, Axes{}), ConfigError);
}

TEST_CASE("figure catalogue") {
  const FigureSpec f2 = figure_spec("fig2");
  CHECK(f2.curves.size() == 5);
  CHECK(f2.panels.size() == 2);
  CHECK(f2.source == DataSource::gr);
  const FigureSpec f4 = figure_spec("fig4");
  CHECK(f4.panels[0].column == "cos_l2");
  CHECK(f4.panels[1].column == "cos_fp");
  const FigureSpec f6 = figure_spec("fig6");
  CHECK(f6.curves.size() == 4);
  for (const auto& c : f6.curves) CHECK(c.config.beta1 == 0.99);
  CHECK(figure_spec("appB_signum").curves.size() == 16);
  CHECK(figure_spec("appA_batch").curves.size() == 4);
  for (const auto& name : figure_names()) CHECK_NOTHROW(figure_spec(name));
  CHECK_THROWS_AS(figure_spec("fig3"), ConfigError);
}

TEST_CASE("figure run writes a complete, reproducible manifest") {
  FigureOptions opts;
  opts.steps = 500;
  opts.seed = 4;
  const fs::path dir = scratch("fig2");
  const FigureResult res = run_figure(figure_spec("fig2", opts), opts, dir, 2);
  CHECK(res.ok());
  const Json manifest = read_json_file(dir / "manifest.json");
  std::set<std::string> listed;
  for (const auto& f : manifest["files"]) listed.insert(f["path"].get<std::string>());
  for (const auto& p : res.files) {
    CHECK(fs::exists(p));
    if (p.filename() != "manifest.json") CHECK(listed.count(p.filename().string()) == 1);
  }
  CHECK(listed.count("adam_inc.csv") == 1);
  CHECK(listed.count("fig2_cos_l2.svg") == 1);

  const fs::path again = scratch("fig2_again");
  const FigureResult res2 = rerun_from_manifest(dir / "manifest.json", again, 1);
  CHECK(res2.ok());
  for (const auto& f : manifest["files"]) {
    const std::string name = f["path"];
    if (name.size() > 4 && name.substr(name.size() - 4) == ".csv") {
      CHECK(read_text_file(dir / name) == read_text_file(again / name));
    }
  }
  // Cached references are reused on a second run into the same directory.
  const auto stamp = fs::last_write_time(dir / "refs.json");
  run_figure(figure_spec("fig2", opts), opts, dir, 1);
  CHECK(fs::last_write_time(dir / "refs.json") == stamp);
  fs::remove_all(dir);
  fs::remove_all(again);
}

TEST_CASE("incremental Signum on shifted-diagonal data approaches the l_inf margin") {
  const Dataset sd = shifted_diagonal_reference_dataset();
  RunConfig cfg;
  cfg.algo = Algo::signum;
  cfg.beta1 = 0.99;
  cfg.sampling = {Sampling::incremental, 1};
  cfg.steps = 200000;
  const RunResult res = run(sd, cfg);
  const Trajectory tr = track(res, sd, cfg, References{});
  REQUIRE(tr.records.back().normalized_linf_margin.has_value());
  CHECK(*tr.records.back().normalized_linf_margin / 1.3 >= 0.9);
}

TEST_CASE("parallel_for visits every index and propagates errors") {
  std::vector<int> hits(50, 0);
  parallel_for(50, 3, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(5, 2, [](std::size_t i) {
    if (i == 3) throw NumericError("boom");
  }), NumericError);
}
