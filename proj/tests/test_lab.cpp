#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <doctest.h>

#include "billiards/commands.hpp"
#include "billiards/config.hpp"
#include "billiards/outputs.hpp"
#include "billiards/sweep.hpp"
#include "tables.hpp"

using namespace billiards;
using namespace billiards::test;
namespace fs = std::filesystem;

namespace {

const char* kTranslate = R"(
name: t
mode: period2
alpha_range: [0, 0.5]
smoothness: [5, 3]
obstacle.1.kind: circle
obstacle.1.center_x: 0
obstacle.1.center_y: 0
obstacle.1.radius: 1
obstacle.2.kind: circle
obstacle.2.center_x: [4, 1]
obstacle.2.center_y: 0
obstacle.2.radius: 1
words: ["1,2"]
alpha_grid: [0, 0.5, 6]
validation_alpha_points: 9
)";

ErrorKind kind_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("config accepted: " << text);
  return ErrorKind::io;
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto p = s.find(from);
  REQUIRE(p != std::string::npos);
  return s.replace(p, from.size(), to);
}

fs::path scratch_dir(const char* name) {
  const fs::path p = fs::temp_directory_path() / "billiards_test_lab" / name;
  fs::remove_all(p);
  return p;
}

// k*(alpha) for the translation family, from d k^2 - 2 d k - 2 = 0
double translate_lambda(double a) {
  const double d = 2 + a;
  return std::log(1 + d * (1 + std::sqrt(1 + 2 / d)));
}

}  // namespace

TEST_CASE("config parsing") {
  const LabConfig cfg = parse_config(kTranslate);
  CHECK(cfg.name == "t");
  CHECK(cfg.family.size() == 2);
  CHECK(cfg.family.period_two_mode());
  CHECK(cfg.family.alpha_max() == 0.5);
  CHECK(cfg.family.obstacle(1).center_x(0.25) == 4.25);
  REQUIRE(cfg.words.size() == 1);
  CHECK(cfg.words[0].id == "w00");
  CHECK(cfg.words[0].word.cyclic);
  const auto grid = cfg.alpha_grid.values();
  REQUIRE(grid.size() == 6);
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == 0.5);
  CHECK(grid[2] == doctest::Approx(0.2));
  CHECK(cfg.padding == 12);
  CHECK(cfg.burn_in == 10);
}

TEST_CASE("config errors") {
  CHECK(kind_of(std::string(kTranslate) + "colour: red\n") == ErrorKind::config);
  CHECK(kind_of(replace(kTranslate, "obstacle.2.", "obstacle.3.")) == ErrorKind::config);
  CHECK(kind_of(replace(kTranslate, "[0, 0.5, 6]", "[0, 0.7, 6]")) == ErrorKind::config);
  CHECK(kind_of(replace(kTranslate, "[0, 0.5, 6]", "[0, 0.5, 1]")) == ErrorKind::config);
  CHECK(kind_of(replace(kTranslate, "period2", "multi")) == ErrorKind::config);
  CHECK(kind_of(replace(kTranslate, "\"1,2\"", "\"1,1\"")) == ErrorKind::config);
  CHECK(kind_of(replace(kTranslate, "kind: circle", "kind: square")) == ErrorKind::config);
  CHECK(kind_of(replace(kTranslate, "[4, 1]", "[4, 1, 0, 0, 1]")) == ErrorKind::config);
  CHECK(kind_of(replace(kTranslate, "[5, 3]", "[5]")) == ErrorKind::config);
  CHECK(kind_of("just text") == ErrorKind::config);
}

TEST_CASE("shipped configs") {
  for (const char* name : {"two_circles_translate", "two_circles_grow", "three_circles",
                           "ellipses", "translate_low_smoothness"})
    CHECK_NOTHROW(load_config(fs::path(kConfigDir) / (std::string(name) + ".cfg")));
  try {
    load_config(fs::path(kConfigDir) / "collinear_three_circles.cfg");
    FAIL("collinear table accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::no_eclipse);
    CHECK(std::string(e.what()).find("(1, 2, 3)") != std::string::npos);
  }
  try {
    load_config("/nonexistent/table.cfg");
    FAIL("missing file accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io);
  }
  const LabConfig low = load_config(fs::path(kConfigDir) / "translate_low_smoothness.cfg");
  CHECK_THROWS_AS(require_differentiable(low), Error);
  const LabConfig three = load_config(fs::path(kConfigDir) / "three_circles.cfg");
  CHECK(three.words.size() == 10);
  CHECK_NOTHROW(require_differentiable(three));
}

TEST_CASE("word specs") {
  const auto a = expand_word_spec("1,2,3", 3);
  REQUIRE(a.size() == 1);
  CHECK(a[0].cyclic);
  const auto b = expand_word_spec("open:1,2,1,3", 3);
  REQUIRE(b.size() == 1);
  CHECK_FALSE(b[0].cyclic);
  CHECK(b[0].size() == 4);
  const auto s = expand_word_spec("sample:4:25:9", 3);
  REQUIRE(s.size() == 4);
  for (const auto& x : s) {
    CHECK(x.size() == 25);
    CHECK(is_admissible(x, 3));
  }
  CHECK(s == expand_word_spec("sample:4:25:9", 3));
  CHECK(s[0] != s[1]);
  CHECK_THROWS_AS(expand_word_spec("1,2,1", 3), Error);  // cyclic wrap 1 -> 1
  CHECK_THROWS_AS(expand_word_spec("sample:2:x:1", 3), Error);
  CHECK_THROWS_AS(expand_word_spec("1,4", 3), Error);
}

TEST_CASE("csv output") {
  CHECK(sweep_csv({}) == std::string(kSweepHeader) + "\n");
  SweepRow r;
  r.alpha = 0.125;
  r.word_id = "w03";
  r.m = 40;
  r.lambda_m = 2.3456789012345;
  r.F_m = -0.5;
  r.fd_slope = -0.49;
  r.lower = 2.0;
  r.upper = 3.0;
  r.max_udot = 0.1;
  r.max_kdot = 0.2;
  r.residual = 1e-16;
  r.cond = 12.5;
  const std::string csv = sweep_csv({r});
  std::istringstream in(csv);
  std::string header, line, extra;
  std::getline(in, header);
  std::getline(in, line);
  CHECK_FALSE(std::getline(in, extra));
  CHECK(header == kSweepHeader);
  std::vector<std::string> cells;
  std::stringstream ls(line);
  for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
  REQUIRE(cells.size() == 12);
  CHECK(std::strtod(cells[0].c_str(), nullptr) == 0.125);
  CHECK(cells[1] == "w03");
  CHECK(cells[2] == "40");
  CHECK(std::strtod(cells[3].c_str(), nullptr) == doctest::Approx(2.3456789012345).epsilon(1e-12));
  CHECK(std::strtod(cells[11].c_str(), nullptr) == 12.5);
  CHECK(failures_csv({{"w01", 0.5, "lost, at alpha\nend"}}) ==
        "alpha,word_id,reason\n5.000000000000e-01,w01,lost; at alpha;end\n");
}

TEST_CASE("translation sweep") {
  LabConfig cfg = parse_config(kTranslate);
  const SweepResult res = run_sweep(cfg);
  REQUIRE(res.rows.size() == 6);
  CHECK(res.failures.empty());
  CHECK(res.bounds.size() == 6);
  for (const auto& r : res.rows) {
    CHECK(r.lambda_m == doctest::Approx(translate_lambda(r.alpha)).epsilon(1e-12));
    CHECK(r.lower <= r.lambda_m);
    CHECK(r.lambda_m <= r.upper);
  }
  CHECK(res.rows[1].alpha == doctest::Approx(0.1));
  CHECK(res.rows[1].lambda_m == doctest::Approx(1.797458).epsilon(1e-6));
  CHECK(res.rows[1].lambda_m - res.rows[0].lambda_m == doctest::Approx(0.034711).epsilon(1e-5));
  CHECK(res.rows[0].F_m == doctest::Approx(std::numbers::sqrt2 / 4).epsilon(1e-12));
  CHECK(res.rows[0].fd_slope == res.rows[0].F_m);
  for (std::size_t i = 0; i < res.bounds.size(); ++i)
    CHECK(res.bounds[i].d_min == doctest::Approx(2 + res.alphas[i]));
  CHECK(res.summary.rows_checked == 5);
  CHECK(res.summary.violations == 0);
  CHECK(res.summary.C0 == doctest::Approx(1.0 / 5.0));
}

TEST_CASE("sweep output is independent of the execution mode") {
  LabConfig cfg = load_config(fs::path(kConfigDir) / "three_circles.cfg");
  cfg.alpha_grid = {0.0, 0.5, 5};
  const std::string a = sweep_csv(run_sweep(cfg, Execution::parallel).rows);
  const std::string b = sweep_csv(run_sweep(cfg, Execution::serial).rows);
  const std::string c = sweep_csv(run_sweep(cfg, Execution::parallel).rows);
  CHECK(a == b);
  CHECK(a == c);
}

TEST_CASE("derivative experiment") {
  SUBCASE("translation family") {
    LabConfig cfg = parse_config(kTranslate);
    const auto b0 = grid_bounds(cfg, {0.0})[0];
    const DerivativeReport rep = run_derivative(cfg, cfg.words[0], b0);
    CHECK(rep.F_m == doctest::Approx(std::numbers::sqrt2 / 4).epsilon(1e-12));
    REQUIRE(rep.rows.size() == 5);
    // slopes converge linearly to F
    for (const auto& r : rep.rows) {
      CHECK(r.fd_slope == doctest::Approx((translate_lambda(r.alpha) - translate_lambda(0)) / r.alpha)
                              .epsilon(1e-9));
      CHECK(r.error / r.alpha <= rep.fitted_K * (1 + 1e-12));
    }
    CHECK(rep.rows.back().error < rep.rows.front().error / 50);
    CHECK(rep.slope_ok);
    CHECK(rep.loglog_slope == doctest::Approx(1.0).epsilon(0.05));
    CHECK(rep.remainder_ok);
    CHECK(rep.bound_ok);
  }
  SUBCASE("zero deformation") {
    LabConfig cfg = parse_config(replace(kTranslate, "[4, 1]", "4"));
    const auto b0 = grid_bounds(cfg, {0.0})[0];
    const DerivativeReport rep = run_derivative(cfg, cfg.words[0], b0);
    CHECK(rep.F_m == 0.0);
    for (const auto& r : rep.rows) CHECK(r.fd_slope == 0.0);
    CHECK(rep.slope_ok);
  }
}

TEST_CASE("commands") {
  std::ostringstream out, err;
  CommandOptions opt;
  opt.config = fs::path(kConfigDir) / "two_circles_translate.cfg";
  opt.out = scratch_dir("cmd");

  CHECK(run_command("lyapunov", opt, out, err) == 0);
  CHECK(out.str().find("1.762747174") != std::string::npos);
  CHECK(fs::exists(*opt.out / "lyapunov.csv"));

  opt.oracle = true;
  CHECK(run_command("lyapunov", opt, out, err) == 0);
  opt.oracle = false;

  CHECK(run_command("check", opt, out, err) == 0);
  CHECK(fs::exists(*opt.out / "bounds.csv"));
  CHECK(run_command("orbit", opt, out, err) == 0);
  CHECK(run_command("oracle", opt, out, err) == 0);
  CHECK(run_command("derivative", opt, out, err) == 0);
  CHECK(run_command("nonsense", opt, out, err) == 2);

  opt.word = "1,1";
  CHECK(run_command("orbit", opt, out, err) == 2);
  opt.word.reset();

  opt.config = fs::path(kConfigDir) / "collinear_three_circles.cfg";
  CHECK(run_command("check", opt, out, err) == 3);
  opt.config = fs::path(kConfigDir) / "translate_low_smoothness.cfg";
  CHECK(run_command("derivative", opt, out, err) == 2);
  CHECK(err.str().find("smoothness") != std::string::npos);
  opt.config = "/nonexistent/x.cfg";
  CHECK(run_command("check", opt, out, err) == 5);

  SUBCASE("sampled word, m = 80, seed 7") {
    std::ostringstream o2;
    CommandOptions s;
    s.config = fs::path(kConfigDir) / "three_circles.cfg";
    s.out = scratch_dir("sampled");
    s.seed = 7;
    s.m = 80;
    CHECK(run_command("lyapunov", s, o2, err) == 0);
    CHECK(o2.str().find("inside") != std::string::npos);
  }
}

TEST_CASE("exit codes") {
  CHECK(exit_code(ErrorKind::config) == 2);
  CHECK(exit_code(ErrorKind::no_eclipse) == 3);
  CHECK(exit_code(ErrorKind::solver) == 4);
  CHECK(exit_code(ErrorKind::grazing) == 4);
  CHECK(exit_code(ErrorKind::io) == 5);
}
