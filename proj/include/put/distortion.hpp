#pragma once

#include <string>
#include <vector>

#include "put/matrix.hpp"
#include "put/state_space.hpp"

namespace put {

struct DistortionMatrix {
  StateSpace states;
  Matrix values;
  std::string units;  // "grid-steps" or "km"

  double d(int x, int y) const { return values(x, y); }
  double max_value() const;
  void validate() const;
};

DistortionMatrix manhattan_grid(int width, int height);

enum class GeoMetric { Haversine, Equirectangular };

double haversine_km(const LatLon& a, const LatLon& b);
double equirectangular_km(const LatLon& a, const LatLon& b);

// Pairwise great-circle distances in km between cluster centers. The
// equirectangular projection is available for sensitivity checks.
DistortionMatrix geo_centers(const std::vector<LatLon>& centers,
                             GeoMetric metric = GeoMetric::Haversine);

// { y : d(x, y) <= dhat }; always contains x.
std::vector<int> feasible_set(const DistortionMatrix& d, int x, double dhat);

void save_distortion_csv(const DistortionMatrix& d, const std::string& path);
DistortionMatrix load_distortion_csv(const std::string& path);

}  // namespace put
