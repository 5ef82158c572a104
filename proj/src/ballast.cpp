#include "bactobot/ballast.hpp"

#include <algorithm>
#include <cmath>

#include "bactobot/errors.hpp"

namespace bactobot {

int WeightInventory::piece_count() const {
  int n = 0;
  for (const auto& it : items) n += it.count;
  return n;
}

void WeightInventory::validate() const {
  for (const auto& it : items) {
    if (!(it.mass > 0.0)) throw ParameterError("ballast piece mass must be > 0");
    if (it.count < 0) throw ParameterError("ballast piece count must be >= 0");
  }
  if (piece_count() > 64) throw ParameterError("ballast inventory exceeds 64 pieces");
}

double neutral_ballast_mass(double fluid_density, double displaced_volume, double dry_mass) {
  return fluid_density * displaced_volume - dry_mass;
}

namespace {

struct Candidate {
  std::vector<int> counts;  // per distinct mass, ascending mass order
  double total = 0.0;
  double error = 0.0;
  int pieces = 0;
};

// Ascending mass list of a candidate compared lexicographically without
// materializing it: walk both lists run by run.
bool lex_less(const std::vector<double>& masses, const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t ia = 0, ib = 0;
  int ra = a.empty() ? 0 : a[0], rb = b.empty() ? 0 : b[0];
  while (true) {
    while (ia < a.size() && ra == 0) { ++ia; ra = ia < a.size() ? a[ia] : 0; }
    while (ib < b.size() && rb == 0) { ++ib; rb = ib < b.size() ? b[ib] : 0; }
    const bool end_a = ia >= a.size();
    const bool end_b = ib >= b.size();
    if (end_a || end_b) return end_a && !end_b;
    if (masses[ia] != masses[ib]) return masses[ia] < masses[ib];
    --ra;
    --rb;
  }
}

bool better_tied(const std::vector<double>& masses, const Candidate& a, const Candidate& b) {
  if (a.pieces != b.pieces) return a.pieces < b.pieces;
  return lex_less(masses, a.counts, b.counts);
}

}  // namespace

TrimSelection trim_select(double residual_mass, const WeightInventory& inventory) {
  if (!(residual_mass >= 0.0)) throw ParameterError("trim_select: residual_mass must be >= 0");
  inventory.validate();

  // Merge identical masses; pieces of equal mass are interchangeable, so the
  // search runs over counts per distinct mass instead of all 2^n subsets.
  std::vector<std::pair<double, int>> merged;
  for (const auto& it : inventory.items) {
    if (it.count == 0) continue;
    auto pos = std::find_if(merged.begin(), merged.end(), [&](const auto& m) { return m.first == it.mass; });
    if (pos == merged.end()) {
      merged.emplace_back(it.mass, it.count);
    } else {
      pos->second += it.count;
    }
  }
  std::sort(merged.begin(), merged.end());
  std::vector<double> masses;
  std::vector<int> limits;
  for (const auto& [m, c] : merged) {
    masses.push_back(m);
    limits.push_back(c);
  }

  // Suffix sums bound what the remaining masses can still add.
  std::vector<double> suffix(masses.size() + 1, 0.0);
  for (std::size_t i = masses.size(); i-- > 0;) suffix[i] = suffix[i + 1] + limits[i] * masses[i];

  // Two passes keep the result independent of visit order: first the
  // minimum error, then the tie-break among everything within tolerance of it.
  std::vector<int> counts(masses.size(), 0);
  auto total_of = [&] {
    double t = 0.0;
    for (std::size_t k = 0; k < masses.size(); ++k) t += counts[k] * masses[k];
    return t;
  };
  auto search = [&](auto&& self, std::size_t i, double partial, int pieces, auto&& bound, auto&& visit) -> void {
    if (partial - residual_mass > bound()) return;
    if (residual_mass - (partial + suffix[i]) > bound()) return;
    if (i == masses.size()) {
      visit(pieces);
      return;
    }
    for (int c = 0; c <= limits[i]; ++c) {
      counts[i] = c;
      self(self, i + 1, partial + c * masses[i], pieces + c, bound, visit);
    }
    counts[i] = 0;
  };

  double min_error = std::abs(residual_mass);
  search(
      search, 0, 0.0, 0, [&] { return min_error + kTrimTieTolerance; },
      [&](int) { min_error = std::min(min_error, std::abs(residual_mass - total_of())); });

  Candidate best;
  bool have_best = false;
  const double cutoff = min_error + kTrimTieTolerance;
  search(search, 0, 0.0, 0, [&] { return cutoff; }, [&](int pieces) {
    const double err = std::abs(residual_mass - total_of());
    if (err > cutoff) return;
    Candidate c{counts, 0.0, err, pieces};
    if (!have_best || better_tied(masses, c, best)) {
      best = std::move(c);
      have_best = true;
    }
  });

  TrimSelection out;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    out.weights.insert(out.weights.end(), best.counts[i], masses[i]);
  }
  for (double w : out.weights) out.total += w;
  out.error = std::abs(residual_mass - out.total);
  out.inventory_exhausted = masses.empty() && residual_mass > 0.0;
  return out;
}

}  // namespace bactobot
