#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace put {

struct GridGeometry {
  int width = 0;
  int height = 0;
};

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

// Finite symbol alphabet W, optionally with grid or geographic geometry.
// States are 0-based internally; grid cells are numbered row-major so that
// state 0 is the top-left cell and labels run "1".."N".
struct StateSpace {
  int size = 0;
  std::vector<std::string> labels;  // empty => default labels "1".."N"
  std::optional<GridGeometry> grid;
  std::vector<LatLon> coords;  // empty unless geographic

  static StateSpace make(int n) {
    if (n < 1) throw std::invalid_argument("StateSpace: size must be >= 1");
    StateSpace s;
    s.size = n;
    return s;
  }

  static StateSpace make_grid(int width, int height) {
    if (width < 1 || height < 1)
      throw std::invalid_argument("StateSpace: grid dimensions must be >= 1");
    StateSpace s;
    s.size = width * height;
    s.grid = GridGeometry{width, height};
    return s;
  }

  static StateSpace from_centers(std::vector<LatLon> centers) {
    if (centers.empty()) throw std::invalid_argument("StateSpace: no centers");
    StateSpace s;
    s.size = static_cast<int>(centers.size());
    s.coords = std::move(centers);
    return s;
  }

  std::string label(int i) const {
    if (i < 0 || i >= size) throw std::out_of_range("StateSpace::label");
    if (!labels.empty()) return labels[i];
    return std::to_string(i + 1);
  }

  int row(int i) const { return i / grid->width; }
  int col(int i) const { return i % grid->width; }
};

}  // namespace put
