#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "billiards/bounds.hpp"
#include "billiards/geometry.hpp"
#include "billiards/orbit.hpp"
#include "billiards/symbolic.hpp"

namespace billiards {

struct WordSpec {
  std::string id;  // w00, w01, ...
  Word word;       // cyclic words are periodic orbits, open words segments
};

struct AlphaGrid {
  double start = 0.0;
  double stop = 0.0;
  int count = 2;

  std::vector<double> values() const;
};

struct LabConfig {
  explicit LabConfig(DeformationFamily f) : family(std::move(f)) {}

  DeformationFamily family;
  std::string name;
  std::vector<WordSpec> words;
  AlphaGrid alpha_grid;
  OrbitOptions orbit;
  int padding = 12;
  std::size_t burn_in = 10;
  double h_fd = 1e-5;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 7;
  int validation_alpha_points = 65;
  int validation_u_points = 512;
  std::optional<double> phi_max;
  std::size_t phi_period = 6;
  std::size_t phi_words = 100;

  /// phi_max sampling settings including the configured words.
  PhiSampling phi_sampling(const std::vector<Word>& extra) const;
};

/// Parses a config document. A relative output_dir is resolved against
/// `base_dir` when one is given (the working directory otherwise). Geometry
/// validation is not run here.
LabConfig parse_config(const std::string& text,
                       const std::filesystem::path& base_dir = {});

/// Reads, parses and validates a config file (convexity and condition (H)
/// over the validation alpha grid).
LabConfig load_config(const std::filesystem::path& path);

/// "1,2" (cyclic), "open:1,2,3", or "sample:N:L:S" (N open words of length
/// L drawn with seed S).
std::vector<Word> expand_word_spec(const std::string& spec, std::size_t z0);

/// Throws a config error unless the declared smoothness is at least (5, 3).
void require_differentiable(const LabConfig& config);

}  // namespace billiards
