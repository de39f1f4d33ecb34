#include "billiards/outputs.hpp"

#include <algorithm>
#include <fstream>
#include <system_error>

#include <fmt/format.h>

namespace billiards {
namespace {

std::string e12(double x) { return fmt::format("{:.12e}", x); }

}  // namespace

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = std::string(kSweepHeader) + "\n";
  for (const auto& r : rows)
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", e12(r.alpha),
                       r.word_id, r.m, e12(r.lambda_m), e12(r.F_m),
                       e12(r.fd_slope), e12(r.lower), e12(r.upper),
                       e12(r.max_udot), e12(r.max_kdot), e12(r.residual),
                       e12(r.cond));
  return out;
}

std::string bounds_csv(const std::vector<double>& alphas,
                       const std::vector<TableBounds>& bounds) {
  std::string out =
      "alpha,d_min,d_max,d_max_orbit,kappa_min,kappa_max,phi_max,k_min,k_max,"
      "lower,upper\n";
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    const TableBounds& b = bounds[i];
    const auto [lo, hi] = lyapunov_bounds(b);
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", e12(alphas.at(i)),
                       e12(b.d_min), e12(b.d_max), e12(b.d_max_orbit),
                       e12(b.kappa_min), e12(b.kappa_max), e12(b.phi_max),
                       e12(b.k_min), e12(b.k_max), e12(lo), e12(hi));
  }
  return out;
}

std::string failures_csv(const std::vector<SweepFailure>& failures) {
  std::string out = "alpha,word_id,reason\n";
  for (const auto& f : failures) {
    std::string reason = f.reason;
    for (char& c : reason)
      if (c == ',' || c == '\n') c = ';';
    out += fmt::format("{},{},{}\n", e12(f.alpha), f.word_id, reason);
  }
  return out;
}

std::string words_csv(const std::vector<WordSpec>& words) {
  std::string out = "word_id,kind,length,word\n";
  for (const auto& w : words)
    out += fmt::format("{},{},{},{}\n", w.id, w.word.cyclic ? "periodic" : "segment",
                       w.word.size(), format_word(w.word, '-'));
  return out;
}

std::string plot_script(const std::vector<SweepRow>& rows,
                        const std::vector<WordSpec>& words) {
  std::string s =
      "# gnuplot -p sweep.gp\n"
      "set datafile separator ','\n"
      "set key outside right\n"
      "set xlabel 'alpha'\n"
      "set ylabel 'lambda_m'\n"
      "set title 'largest Lyapunov exponent along the deformation'\n";
  std::string plots =
      "plot 'bounds.csv' every ::1 using 1:10:11 with filledcurves "
      "fc rgb '#e0e0e0' title 'a-priori bounds'";
  for (const auto& w : words) {
    const auto base = std::find_if(rows.begin(), rows.end(), [&](const SweepRow& r) {
      return r.word_id == w.id;
    });
    if (base == rows.end()) continue;
    s += fmt::format("tangent_{0}(x) = {1} + {2} * (x - {3})\n", w.id,
                     e12(base->lambda_m), e12(base->F_m), e12(base->alpha));
    plots += fmt::format(
        ", \\\n  'sweep.csv' every ::1 using 1:(strcol(2) eq '{0}' ? $4 : 1/0) "
        "with linespoints title '{0}'"
        ", \\\n  tangent_{0}(x) with lines dt 2 notitle",
        w.id);
  }
  return s + plots + "\n";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec)
    throw io_error(fmt::format("cannot create directory '{}': {}",
                               path.parent_path().string(), ec.message()));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error(fmt::format("cannot open '{}' for writing", path.string()));
  out << content;
  out.flush();
  if (!out) throw io_error(fmt::format("write to '{}' failed", path.string()));
}

void emit_outputs(const SweepResult& result, const std::vector<WordSpec>& words,
                  const std::filesystem::path& dir) {
  write_file(dir / "sweep.csv", sweep_csv(result.rows));
  write_file(dir / "bounds.csv", bounds_csv(result.alphas, result.bounds));
  write_file(dir / "words.csv", words_csv(words));
  write_file(dir / "sweep_failures.csv", failures_csv(result.failures));
  write_file(dir / "sweep.gp", plot_script(result.rows, words));
}

}  // namespace billiards
