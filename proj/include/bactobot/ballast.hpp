#pragma once

#include <vector>

namespace bactobot {

struct WeightItem {
  double mass = 0.0;  // kg
  int count = 0;
};

/// Available ballast pieces. At most 64 pieces in total.
struct WeightInventory {
  std::vector<WeightItem> items;

  int piece_count() const;
  void validate() const;
};

struct TrimSelection {
  std::vector<double> weights;  // selected piece masses, ascending
  double total = 0.0;           // kg
  double error = 0.0;           // |residual - total|, kg
  bool inventory_exhausted = false;  // residual > 0 but nothing to select
};

/// Errors closer than this are ties; ties go to fewer pieces, then to the
/// lexicographically smallest ascending mass list.
inline constexpr double kTrimTieTolerance = 1e-9;

/// Ballast that still has to be added for neutral buoyancy. Negative means
/// the robot is too heavy even without ballast.
double neutral_ballast_mass(double fluid_density, double displaced_volume, double dry_mass);

/// Subset of the inventory whose total is closest to `residual_mass`.
TrimSelection trim_select(double residual_mass, const WeightInventory& inventory);

}  // namespace bactobot
