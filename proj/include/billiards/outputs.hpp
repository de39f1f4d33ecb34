#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "billiards/config.hpp"
#include "billiards/sweep.hpp"

namespace billiards {

inline constexpr const char* kSweepHeader =
    "alpha,word_id,m,lambda_m,F_m,fd_slope,lower,upper,max_udot,max_kdot,"
    "residual,cond";

/// %.12e with LF line endings.
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string bounds_csv(const std::vector<double>& alphas,
                       const std::vector<TableBounds>& bounds);
std::string failures_csv(const std::vector<SweepFailure>& failures);
std::string words_csv(const std::vector<WordSpec>& words);

/// gnuplot script plotting lambda_m(alpha) per word over the bound band,
/// with the tangent line alpha_0 -> lambda + F (alpha - alpha_0).
std::string plot_script(const std::vector<SweepRow>& rows,
                        const std::vector<WordSpec>& words);

/// Writes `content` to `path`, creating parent directories. I/O errors carry
/// the path.
void write_file(const std::filesystem::path& path, const std::string& content);

/// sweep.csv, bounds.csv, words.csv, sweep_failures.csv and sweep.gp.
void emit_outputs(const SweepResult& result, const std::vector<WordSpec>& words,
                  const std::filesystem::path& dir);

}  // namespace billiards
