#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <doctest.h>

#include "billiards/error.hpp"
#include "billiards/symbolic.hpp"

using namespace billiards;

namespace {

Word w(std::vector<std::size_t> one_based, bool cyclic = false) {
  for (auto& s : one_based) --s;
  return {one_based, cyclic};
}

// brute force: admissible cyclic words of length p that are primitive, as the
// set of their lexicographically smallest rotations
std::set<std::vector<std::size_t>> necklaces(std::size_t z0, std::size_t p) {
  std::set<std::vector<std::size_t>> out;
  std::vector<std::size_t> s(p, 0);
  while (true) {
    bool ok = true;
    for (std::size_t i = 0; i < p; ++i) ok = ok && s[i] != s[(i + 1) % p];
    if (ok) {
      std::vector<std::vector<std::size_t>> rots;
      for (std::size_t r = 0; r < p; ++r) {
        std::vector<std::size_t> t(p);
        for (std::size_t i = 0; i < p; ++i) t[i] = s[(i + r) % p];
        rots.push_back(t);
      }
      const bool primitive =
          std::count(rots.begin(), rots.end(), s) == 1;  // no nontrivial period
      if (primitive) out.insert(*std::min_element(rots.begin(), rots.end()));
    }
    std::size_t i = 0;
    while (i < p && ++s[i] == z0) s[i++] = 0;
    if (i == p) break;
  }
  return out;
}

std::vector<std::size_t> min_rotation(const std::vector<std::size_t>& s) {
  std::vector<std::size_t> best = s, t = s;
  for (std::size_t r = 1; r < s.size(); ++r) {
    std::rotate(t.begin(), t.begin() + 1, t.end());
    best = std::min(best, t);
  }
  return best;
}

}  // namespace

TEST_CASE("admissibility") {
  CHECK(is_admissible(w({1, 2, 1, 3}), 3));
  CHECK_FALSE(is_admissible(w({1, 1, 2}), 3));
  CHECK(is_admissible(w({1, 2, 3, 1}), 3));
  CHECK(is_admissible(w({1, 2, 3}, true), 3));
  CHECK_FALSE(is_admissible(w({1, 2, 3, 1}, true), 3));
  CHECK_THROWS_AS(is_admissible(w({1, 4}), 3), Error);
}

TEST_CASE("theta metric") {
  // windows of half-width 4, index 4 is the center
  std::vector<std::size_t> xi{0, 1, 0, 2, 1, 0, 1, 2, 0};
  CHECK(theta_metric(xi, xi, 0.5) == 0.0);

  auto eta = xi;
  eta[4] = 2;
  CHECK(theta_metric(xi, eta, 0.5) == 1.0);

  eta = xi;
  eta[4 + 3] = 1;  // agree for |i| <= 2, differ at i = 3
  CHECK(theta_metric(xi, eta, 0.5) == doctest::Approx(0.125));
  eta = xi;
  eta[4 - 3] = 2;
  CHECK(theta_metric(xi, eta, 0.5) == doctest::Approx(0.125));

  // ultrametric inequality on random windows
  std::vector<std::vector<std::size_t>> ws;
  for (std::uint64_t s = 0; s < 6; ++s) {
    Word a = sample_itinerary(3, 9, s % 3);
    if (s >= 3) a.symbols[4 + s % 3] = (a.symbols[4 + s % 3] + 1) % 3;
    ws.push_back(a.symbols);
  }
  for (const auto& a : ws)
    for (const auto& b : ws)
      for (const auto& c : ws)
        CHECK(theta_metric(a, c, 0.3) <=
              std::max(theta_metric(a, b, 0.3), theta_metric(b, c, 0.3)) + 1e-15);

  std::vector<std::size_t> short_window{0, 1, 0};
  CHECK_THROWS_AS(theta_metric(xi, short_window, 0.5), Error);
}

TEST_CASE("itinerary sampling") {
  SUBCASE("two symbols force alternation") {
    const Word a = sample_itinerary(2, 20, 11);
    CHECK(is_admissible(a, 2));
    for (std::size_t i = 2; i < a.size(); ++i) CHECK(a.symbols[i] == a.symbols[i - 2]);
  }
  SUBCASE("deterministic in the seed") {
    const Word a = sample_itinerary(3, 4, 42);
    CHECK(a == sample_itinerary(3, 4, 42));
    CHECK(is_admissible(a, 3));
    CHECK(a.size() == 4);
    CHECK_FALSE(a.cyclic);
    CHECK(sample_itinerary(3, 40, 1) != sample_itinerary(3, 40, 2));
  }
  SUBCASE("transition frequencies are uniform over successors") {
    const std::size_t n = 100001;
    const Word a = sample_itinerary(3, n, 2024);
    REQUIRE(is_admissible(a, 3));
    double counts[3][3] = {};
    for (std::size_t i = 0; i + 1 < n; ++i) counts[a.symbols[i]][a.symbols[i + 1]] += 1;
    double chi2 = 0.0;
    for (int from = 0; from < 3; ++from) {
      const double total = counts[from][(from + 1) % 3] + counts[from][(from + 2) % 3];
      const double expected = total / 2;
      for (int to = 0; to < 3; ++to) {
        if (to == from) continue;
        // each successor count is binomial(total, 1/2)
        CHECK(std::abs(counts[from][to] - expected) <= 3 * std::sqrt(total / 4));
        chi2 += (counts[from][to] - expected) * (counts[from][to] - expected) / expected;
      }
    }
    CHECK(chi2 < 16.27);  // 3 degrees of freedom, 0.999 quantile
  }
  SUBCASE("task seeds are distinct") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(task_seed(7, i));
    CHECK(seen.size() == 1000);
    CHECK(task_seed(7, 3) == task_seed(7, 3));
  }
}

TEST_CASE("smallest successor") {
  CHECK(smallest_successor(0) == 1);
  CHECK(smallest_successor(1) == 0);
  CHECK(smallest_successor(2) == 0);
}

TEST_CASE("periodic word enumeration matches brute force") {
  const auto words = enumerate_periodic_words(3, 6);
  for (std::size_t p = 2; p <= 6; ++p) {
    std::set<std::vector<std::size_t>> got;
    for (const auto& x : words) {
      CHECK(x.cyclic);
      CHECK(is_admissible(x, 3));
      if (x.size() == p) got.insert(min_rotation(x.symbols));
    }
    CHECK(got == necklaces(3, p));
  }
  // period 2 on three symbols: 12, 13, 23
  CHECK(necklaces(3, 2).size() == 3);
  CHECK(necklaces(3, 3).size() == 2);
}

TEST_CASE("parse and format") {
  const Word a = parse_word("1,2,1,3", false);
  CHECK(a.symbols == std::vector<std::size_t>{0, 1, 0, 2});
  CHECK(format_word(a) == "1,2,1,3");
  CHECK(format_word(a, '-') == "1-2-1-3");
  CHECK(parse_word(" 2 , 3 ", true).symbols == std::vector<std::size_t>{1, 2});
  CHECK_THROWS_AS(parse_word("1,,2", false), Error);
  CHECK_THROWS_AS(parse_word("0,1", false), Error);
  CHECK_THROWS_AS(parse_word("a,b", false), Error);
  CHECK_THROWS_AS(parse_word("", false), Error);
}
