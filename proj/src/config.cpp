#include "billiards/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace billiards {
namespace {

const std::set<std::string> kObstacleFields = {
    "kind", "center_x", "center_y", "radius", "semi_a", "semi_b", "rotation"};

const std::set<std::string> kTopLevel = {
    "name", "mode", "alpha_range", "smoothness", "words", "alpha_grid",
    "tol_orbit", "tol_shadow", "padding", "burn_in", "h_fd", "output_dir",
    "seed", "validation_alpha_points", "validation_u_points", "phi_max",
    "phi_period", "phi_words"};

template <typename T>
T as(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw config_error(fmt::format("key '{}': wrong type", key));
  }
}

std::vector<double> numbers(const YAML::Node& node, const std::string& key) {
  if (node.IsScalar()) return {as<double>(node, key)};
  if (!node.IsSequence())
    throw config_error(fmt::format("key '{}': expected a number or a list", key));
  std::vector<double> out;
  for (const auto& v : node) out.push_back(as<double>(v, key));
  return out;
}

std::size_t parse_count(std::string_view s, std::string_view spec) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw config_error(fmt::format("bad number '{}' in word spec '{}'", s, spec));
  return v;
}

}  // namespace

std::vector<double> AlphaGrid::values() const {
  std::vector<double> out;
  if (count == 1) return {start};
  for (int i = 0; i < count; ++i)
    out.push_back(i + 1 == count ? stop : start + (stop - start) * i / (count - 1));
  return out;
}

PhiSampling LabConfig::phi_sampling(const std::vector<Word>& extra) const {
  PhiSampling s;
  s.max_period = phi_period;
  s.random_words = phi_words;
  s.seed = seed;
  s.extra_words = extra;
  return s;
}

std::vector<Word> expand_word_spec(const std::string& spec, std::size_t z0) {
  std::vector<Word> out;
  if (spec.starts_with("sample:")) {
    std::vector<std::string_view> parts;
    std::string_view rest(spec);
    rest.remove_prefix(7);
    while (true) {
      const auto colon = rest.find(':');
      parts.push_back(rest.substr(0, colon));
      if (colon == std::string_view::npos) break;
      rest.remove_prefix(colon + 1);
    }
    if (parts.size() != 3)
      throw config_error(fmt::format("word spec '{}': expected sample:N:L:S", spec));
    const std::size_t n = parse_count(parts[0], spec);
    const std::size_t len = parse_count(parts[1], spec);
    const std::uint64_t seed = parse_count(parts[2], spec);
    if (len < 2) throw config_error("sampled words need length >= 2");
    for (std::size_t i = 0; i < n; ++i)
      out.push_back(sample_itinerary(z0, len, task_seed(seed, i)));
  } else if (spec.starts_with("open:")) {
    out.push_back(parse_word(std::string_view(spec).substr(5), false));
  } else {
    out.push_back(parse_word(spec, true));
  }
  for (const Word& w : out) {
    if (!is_admissible(w, z0))
      throw config_error(fmt::format("word '{}' is not admissible", spec));
    if (w.cyclic && w.size() < 2)
      throw config_error(fmt::format("periodic word '{}' is too short", spec));
  }
  return out;
}

LabConfig parse_config(const std::string& text,
                       const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw config_error(fmt::format("config parse error: {}", e.what()));
  }
  if (!root.IsMap()) throw config_error("config must be a key: value mapping");

  std::map<std::string, YAML::Node> keys;
  std::map<int, std::map<std::string, YAML::Node>> obstacle_keys;
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (key.starts_with("obstacle.")) {
      const auto dot = key.find('.', 9);
      if (dot == std::string::npos)
        throw config_error(fmt::format("bad obstacle key '{}'", key));
      int idx = 0;
      const std::string num = key.substr(9, dot - 9);
      const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), idx);
      const std::string field = key.substr(dot + 1);
      if (ec != std::errc{} || ptr != num.data() + num.size() || idx < 1 ||
          !kObstacleFields.contains(field))
        throw config_error(fmt::format("unknown key '{}'", key));
      obstacle_keys[idx][field] = kv.second;
    } else if (kTopLevel.contains(key)) {
      keys[key] = kv.second;
    } else {
      throw config_error(fmt::format("unknown key '{}'", key));
    }
  }
  auto required = [&](const std::string& k) -> const YAML::Node& {
    const auto it = keys.find(k);
    if (it == keys.end()) throw config_error(fmt::format("missing key '{}'", k));
    return it->second;
  };

  const auto mode = as<std::string>(required("mode"), "mode");
  if (mode != "period2" && mode != "multi")
    throw config_error("mode must be 'period2' or 'multi'");
  const auto range = numbers(required("alpha_range"), "alpha_range");
  if (range.size() != 2 || range[0] != 0.0 || !(range[1] > 0.0))
    throw config_error("alpha_range must be [0, b] with b > 0");
  const auto smooth = numbers(required("smoothness"), "smoothness");
  if (smooth.size() != 2)
    throw config_error("smoothness must be [r, r_alpha]");
  Smoothness sm{static_cast<int>(smooth[0]), static_cast<int>(smooth[1])};
  if (sm.r != smooth[0] || sm.r_alpha != smooth[1] || sm.r_alpha < 0)
    throw config_error("smoothness entries must be non-negative integers");

  std::vector<ObstacleSpec> obstacles;
  int expected = 1;
  for (auto& [idx, fields] : obstacle_keys) {
    if (idx != expected++)
      throw config_error(fmt::format("obstacle numbering must be 1..n, found {}", idx));
    auto field = [&](const std::string& f) -> Polynomial {
      const auto it = fields.find(f);
      if (it == fields.end())
        throw config_error(fmt::format("obstacle {}: missing '{}'", idx, f));
      return Polynomial(numbers(it->second, fmt::format("obstacle.{}.{}", idx, f)));
    };
    const auto kind_it = fields.find("kind");
    const std::string kind =
        kind_it == fields.end() ? "" : as<std::string>(kind_it->second, "kind");
    if (kind == "circle") {
      for (const char* f : {"semi_a", "semi_b", "rotation"})
        if (fields.contains(f))
          throw config_error(fmt::format("obstacle {}: circle has no '{}'", idx, f));
      obstacles.push_back(ObstacleSpec::circle(field("center_x"), field("center_y"),
                                               field("radius")));
    } else if (kind == "ellipse") {
      if (fields.contains("radius"))
        throw config_error(fmt::format("obstacle {}: ellipse has no 'radius'", idx));
      const Polynomial rot = fields.contains("rotation") ? field("rotation")
                                                          : Polynomial{0.0};
      obstacles.push_back(ObstacleSpec::ellipse(field("center_x"), field("center_y"),
                                                field("semi_a"), field("semi_b"), rot));
    } else {
      throw config_error(fmt::format("obstacle {}: kind must be circle or ellipse", idx));
    }
  }

  LabConfig cfg{DeformationFamily(std::move(obstacles), range[1], sm,
                                  mode == "period2")};
  auto opt = [&](const std::string& k) -> const YAML::Node* {
    const auto it = keys.find(k);
    return it == keys.end() ? nullptr : &it->second;
  };
  if (auto* n = opt("name")) cfg.name = as<std::string>(*n, "name");
  if (auto* n = opt("tol_orbit")) cfg.orbit.tol_orbit = as<double>(*n, "tol_orbit");
  if (auto* n = opt("tol_shadow")) cfg.orbit.tol_shadow = as<double>(*n, "tol_shadow");
  if (auto* n = opt("padding")) cfg.padding = as<int>(*n, "padding");
  if (auto* n = opt("burn_in")) cfg.burn_in = as<std::size_t>(*n, "burn_in");
  if (auto* n = opt("h_fd")) cfg.h_fd = as<double>(*n, "h_fd");
  if (auto* n = opt("seed")) cfg.seed = as<std::uint64_t>(*n, "seed");
  if (auto* n = opt("validation_alpha_points"))
    cfg.validation_alpha_points = as<int>(*n, "validation_alpha_points");
  if (auto* n = opt("validation_u_points"))
    cfg.validation_u_points = as<int>(*n, "validation_u_points");
  if (auto* n = opt("phi_max")) cfg.phi_max = as<double>(*n, "phi_max");
  if (auto* n = opt("phi_period")) cfg.phi_period = as<std::size_t>(*n, "phi_period");
  if (auto* n = opt("phi_words")) cfg.phi_words = as<std::size_t>(*n, "phi_words");
  if (auto* n = opt("output_dir"))
    cfg.output_dir = as<std::string>(*n, "output_dir");
  if (cfg.output_dir.is_relative() && !base_dir.empty())
    cfg.output_dir = base_dir / cfg.output_dir;

  if (!(cfg.orbit.tol_orbit > 0.0) || !(cfg.orbit.tol_shadow > 0.0))
    throw config_error("tolerances must be positive");
  if (cfg.padding < 0) throw config_error("padding must be >= 0");
  if (!(cfg.h_fd > 0.0)) throw config_error("h_fd must be positive");
  if (cfg.validation_alpha_points < 2 || cfg.validation_u_points < 64)
    throw config_error("validation grid needs >= 2 alpha points and >= 64 u points");

  const auto grid = numbers(required("alpha_grid"), "alpha_grid");
  if (grid.size() != 3 || grid[2] != static_cast<int>(grid[2]))
    throw config_error("alpha_grid must be [start, stop, count]");
  cfg.alpha_grid = {grid[0], grid[1], static_cast<int>(grid[2])};
  if (cfg.alpha_grid.count < 2)
    throw config_error("alpha_grid count must be >= 2");
  if (!(cfg.alpha_grid.start >= 0.0 && cfg.alpha_grid.stop <= range[1] &&
        cfg.alpha_grid.start < cfg.alpha_grid.stop))
    throw config_error(fmt::format(
        "alpha_grid [{}, {}] must be increasing and inside [0, {}]",
        cfg.alpha_grid.start, cfg.alpha_grid.stop, range[1]));

  const YAML::Node& words = required("words");
  if (!words.IsSequence() || words.size() == 0)
    throw config_error("words must be a non-empty list");
  for (const auto& w : words)
    for (Word& word : expand_word_spec(as<std::string>(w, "words"),
                                       cfg.family.size()))
      cfg.words.push_back({fmt::format("w{:02d}", cfg.words.size()), std::move(word)});
  return cfg;
}

LabConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error(fmt::format("cannot read config '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  LabConfig cfg = parse_config(buf.str());
  validate_family(cfg.family, cfg.validation_alpha_points, cfg.validation_u_points);
  return cfg;
}

void require_differentiable(const LabConfig& config) {
  const Smoothness s = config.family.smoothness();
  if (s.r < 5 || s.r_alpha < 3)
    throw config_error(fmt::format(
        "the derivative experiment needs a C^(5,3) deformation; this config "
        "declares smoothness ({}, {})",
        s.r, s.r_alpha));
}

}  // namespace billiards
