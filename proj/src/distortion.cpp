#include "put/distortion.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "put/util.hpp"

namespace put {

static constexpr double kEarthRadiusKm = 6371.0;

double DistortionMatrix::max_value() const {
  double m = 0.0;
  for (double v : values.data) m = std::max(m, v);
  return m;
}

void DistortionMatrix::validate() const {
  if (values.rows != states.size || values.cols != states.size)
    throw std::invalid_argument("DistortionMatrix: shape does not match state space");
  for (int x = 0; x < states.size; ++x) {
    if (values(x, x) != 0.0)
      throw std::invalid_argument("DistortionMatrix: d(x,x) != 0 for state " + states.label(x));
  }
  for (double v : values.data)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("DistortionMatrix: entries must be finite and nonnegative");
}

DistortionMatrix manhattan_grid(int width, int height) {
  StateSpace space = StateSpace::make_grid(width, height);
  int n = space.size;
  Matrix m(n, n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      m(x, y) = std::abs(x / width - y / width) + std::abs(x % width - y % width);
  DistortionMatrix out{std::move(space), std::move(m), "grid-steps"};
  out.validate();
  return out;
}

static double deg2rad(double d) { return d * M_PI / 180.0; }

double haversine_km(const LatLon& a, const LatLon& b) {
  double dlat = deg2rad(b.lat - a.lat);
  double dlon = deg2rad(b.lon - a.lon);
  double s = std::sin(dlat / 2), t = std::sin(dlon / 2);
  double h = s * s + std::cos(deg2rad(a.lat)) * std::cos(deg2rad(b.lat)) * t * t;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

double equirectangular_km(const LatLon& a, const LatLon& b) {
  double x = deg2rad(b.lon - a.lon) * std::cos(deg2rad((a.lat + b.lat) / 2));
  double y = deg2rad(b.lat - a.lat);
  return kEarthRadiusKm * std::sqrt(x * x + y * y);
}

DistortionMatrix geo_centers(const std::vector<LatLon>& centers, GeoMetric metric) {
  StateSpace space = StateSpace::from_centers(centers);
  int n = space.size;
  for (const auto& c : centers) {
    if (c.lat < -90.0 || c.lat > 90.0 || c.lon < -180.0 || c.lon > 180.0)
      throw std::invalid_argument("geo_centers: coordinate out of range");
  }
  Matrix m(n, n);
  for (int x = 0; x < n; ++x) {
    for (int y = x + 1; y < n; ++y) {
      double v = metric == GeoMetric::Haversine ? haversine_km(centers[x], centers[y])
                                                : equirectangular_km(centers[x], centers[y]);
      m(x, y) = v;
      m(y, x) = v;
    }
  }
  DistortionMatrix out{std::move(space), std::move(m), "km"};
  out.validate();
  return out;
}

std::vector<int> feasible_set(const DistortionMatrix& d, int x, double dhat) {
  if (dhat < 0.0) throw std::invalid_argument("feasible_set: dhat must be >= 0");
  std::vector<int> out;
  for (int y = 0; y < d.states.size; ++y)
    if (d.d(x, y) <= dhat) out.push_back(y);
  return out;
}

void save_distortion_csv(const DistortionMatrix& d, const std::string& path) {
  std::ostringstream os;
  int n = d.states.size;
  for (int j = 0; j < n; ++j) os << (j ? "," : "") << d.states.label(j);
  os << "\n";
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) os << (j ? "," : "") << fmt_double(d.values(i, j));
    os << "\n";
  }
  atomic_write(path, os.str());
}

DistortionMatrix load_distortion_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_distortion_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_distortion_csv: empty file");
  auto labels = split_csv_line(line);
  int n = static_cast<int>(labels.size());
  StateSpace space = StateSpace::make(n);
  space.labels = labels;
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    if (!std::getline(in, line))
      throw std::runtime_error("load_distortion_csv: expected " + std::to_string(n) + " rows");
    auto cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) != n)
      throw std::runtime_error("load_distortion_csv: row " + std::to_string(i + 1) +
                               " has wrong width");
    for (int j = 0; j < n; ++j) m(i, j) = std::strtod(cells[j].c_str(), nullptr);
  }
  DistortionMatrix out{std::move(space), std::move(m), "custom"};
  out.validate();
  return out;
}

}  // namespace put
