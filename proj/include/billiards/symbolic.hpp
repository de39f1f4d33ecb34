#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace billiards {

/// Finite itinerary over obstacle indices. Symbols are 0-based internally and
/// 1-based in every textual form.
struct Word {
  std::vector<std::size_t> symbols;
  bool cyclic = false;

  std::size_t size() const { return symbols.size(); }
  bool operator==(const Word&) const = default;
};

/// Consecutive symbols differ (and last != first when cyclic). Throws a config
/// error if a symbol is outside {0, ..., z0 - 1}.
bool is_admissible(const Word& word, std::size_t z0);

/// Ultrametric on two-sided windows xi[-W..W] stored as 2W+1 entries:
/// 0 if equal, otherwise theta^n with n the largest j such that the windows
/// agree on |i| < j. Beyond the window the sequences are treated as equal.
double theta_metric(std::span<const std::size_t> xi,
                    std::span<const std::size_t> eta, double theta);

/// Uniform Markov measure on admissible transitions: uniform first symbol,
/// then uniform over the z0 - 1 allowed successors. Deterministic in seed.
Word sample_itinerary(std::size_t z0, std::size_t length, std::uint64_t seed);

/// Seed for the i-th task of a seeded batch; independent of scheduling order.
std::uint64_t task_seed(std::uint64_t seed, std::uint64_t task);

/// Smallest admissible symbol different from `neighbor`.
std::size_t smallest_successor(std::size_t neighbor);

/// Primitive cyclic admissible words of each period 2..max_period, one
/// representative per rotation class.
std::vector<Word> enumerate_periodic_words(std::size_t z0,
                                           std::size_t max_period);

/// "1,2,1,3" -> symbols {0,1,0,2}.
Word parse_word(std::string_view text, bool cyclic);
/// {0,1,0,2} -> "1,2,1,3".
std::string format_word(const Word& word, char sep = ',');

}  // namespace billiards
