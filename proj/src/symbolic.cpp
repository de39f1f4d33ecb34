#include "billiards/symbolic.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "billiards/error.hpp"

namespace billiards {

bool is_admissible(const Word& word, std::size_t z0) {
  for (std::size_t s : word.symbols)
    if (s >= z0)
      throw config_error(
          fmt::format("symbol {} outside alphabet {{1..{}}}", s + 1, z0));
  const auto& sy = word.symbols;
  for (std::size_t j = 0; j + 1 < sy.size(); ++j)
    if (sy[j] == sy[j + 1]) return false;
  if (word.cyclic && sy.size() >= 2 && sy.front() == sy.back()) return false;
  if (word.cyclic && sy.size() == 1) return false;
  return true;
}

double theta_metric(std::span<const std::size_t> xi,
                    std::span<const std::size_t> eta, double theta) {
  if (!(theta > 0.0 && theta < 1.0))
    throw config_error("theta must lie in (0, 1)");
  if (xi.size() != eta.size() || xi.size() % 2 == 0)
    throw config_error(fmt::format(
        "theta_metric needs matching odd-length windows, got {} and {}",
        xi.size(), eta.size()));
  const std::size_t w = xi.size() / 2;
  // n = number of radii r = 0, 1, ... on which both +r and -r agree.
  std::size_t n = 0;
  for (; n <= w; ++n)
    if (xi[w + n] != eta[w + n] || xi[w - n] != eta[w - n]) break;
  if (n > w) return 0.0;
  return std::pow(theta, static_cast<double>(n));
}

std::uint64_t task_seed(std::uint64_t seed, std::uint64_t task) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(task),
                    static_cast<std::uint32_t>(task >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

Word sample_itinerary(std::size_t z0, std::size_t length, std::uint64_t seed) {
  if (z0 < 2) throw config_error("sampling needs at least 2 symbols");
  std::mt19937_64 rng(seed);
  Word w;
  w.cyclic = false;
  w.symbols.reserve(length);
  for (std::size_t j = 0; j < length; ++j) {
    if (j == 0) {
      w.symbols.push_back(static_cast<std::size_t>(rng() % z0));
    } else {
      // uniform over the z0 - 1 symbols different from the previous one
      std::size_t s = static_cast<std::size_t>(rng() % (z0 - 1));
      if (s >= w.symbols.back()) ++s;
      w.symbols.push_back(s);
    }
  }
  return w;
}

std::size_t smallest_successor(std::size_t neighbor) {
  return neighbor == 0 ? 1 : 0;
}

std::vector<Word> enumerate_periodic_words(std::size_t z0,
                                           std::size_t max_period) {
  std::vector<Word> out;
  for (std::size_t p = 2; p <= max_period; ++p) {
    std::vector<std::size_t> s(p, 0);
    while (true) {
      Word w{s, true};
      bool ok = is_admissible(w, z0);
      if (ok) {
        // canonical: lexicographically smallest rotation, and primitive
        for (std::size_t r = 1; r < p && ok; ++r) {
          std::vector<std::size_t> rot(s.begin() + static_cast<long>(r), s.end());
          rot.insert(rot.end(), s.begin(), s.begin() + static_cast<long>(r));
          if (rot < s || rot == s) ok = false;
        }
      }
      if (ok) out.push_back(w);
      std::size_t k = 0;
      while (k < p && ++s[k] == z0) s[k++] = 0;
      if (k == p) break;
    }
  }
  return out;
}

Word parse_word(std::string_view text, bool cyclic) {
  Word w;
  w.cyclic = cyclic;
  if (text.find_first_not_of(" \t") == std::string_view::npos)
    throw config_error(fmt::format("empty word '{}'", text));
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find_first_of(",-", pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view tok = text.substr(pos, end - pos);
    while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t')) tok.remove_suffix(1);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size() || v < 1)
      throw config_error(fmt::format("bad symbol '{}' in word '{}'", tok, text));
    w.symbols.push_back(static_cast<std::size_t>(v - 1));
    pos = end + 1;
  }
  return w;
}

std::string format_word(const Word& word, char sep) {
  std::string out;
  for (std::size_t j = 0; j < word.symbols.size(); ++j) {
    if (j) out += sep;
    out += std::to_string(word.symbols[j] + 1);
  }
  return out;
}

}  // namespace billiards
