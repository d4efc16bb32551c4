#include "put/geolife.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "put/util.hpp"

namespace put {

int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  int64_t era = (y >= 0 ? y : y - 399) / 400;
  int yoe = static_cast<int>(y - era * 400);
  int doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  int doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

static int64_t parse_timestamp(const std::string& date, const std::string& time, int line_no) {
  int y, mo, d, h, mi, s;
  if (std::sscanf(date.c_str(), "%d-%d-%d", &y, &mo, &d) != 3 ||
      std::sscanf(time.c_str(), "%d:%d:%d", &h, &mi, &s) != 3 || mo < 1 || mo > 12 || d < 1 ||
      d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 60)
    throw std::runtime_error("parse_plt: bad date/time at line " + std::to_string(line_no));
  return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

std::vector<GpsPoint> parse_plt(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  for (int i = 0; i < 6; ++i) {
    if (!std::getline(in, line))
      throw std::runtime_error("parse_plt: fewer than 6 header lines");
    ++line_no;
  }
  std::vector<GpsPoint> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() < 7)
      throw std::runtime_error("parse_plt: expected 7 fields at line " +
                               std::to_string(line_no));
    GpsPoint p;
    try {
      p.lat = std::stod(fields[0]);
      p.lon = std::stod(fields[1]);
    } catch (const std::exception&) {
      throw std::runtime_error("parse_plt: bad coordinate at line " + std::to_string(line_no));
    }
    if (p.lat < -90.0 || p.lat > 90.0 || p.lon < -180.0 || p.lon > 180.0)
      throw std::runtime_error("parse_plt: coordinate out of range at line " +
                               std::to_string(line_no));
    p.timestamp = parse_timestamp(fields[5], fields[6], line_no);
    if (!out.empty() && p.timestamp < out.back().timestamp)
      throw std::runtime_error("parse_plt: timestamps decrease at line " +
                               std::to_string(line_no));
    out.push_back(p);
  }
  return out;
}

std::vector<GpsPoint> load_plt(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_plt: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_plt(buf.str());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(std::string(e.what()) + " (" + path + ")");
  }
}

static double point_dist_m(const GpsPoint& a, const GpsPoint& b) {
  return haversine_km({a.lat, a.lon}, {b.lat, b.lon}) * 1000.0;
}

ClusterModel dbscan(const std::vector<GpsPoint>& points, double eps_m, int min_pts) {
  if (!(eps_m > 0.0)) throw std::invalid_argument("dbscan: eps_m must be > 0");
  if (min_pts < 1) throw std::invalid_argument("dbscan: min_pts must be >= 1");
  int n = static_cast<int>(points.size());
  ClusterModel model;
  model.eps_m = eps_m;
  model.min_pts = min_pts;
  model.assignments.assign(n, -1);

  std::vector<char> visited(n, 0);
  auto neighbors = [&](int i) {
    std::vector<int> out;
    for (int j = 0; j < n; ++j)
      if (point_dist_m(points[i], points[j]) <= eps_m) out.push_back(j);
    return out;
  };

  int cluster = 0;
  for (int i = 0; i < n; ++i) {
    if (visited[i]) continue;
    visited[i] = 1;
    std::vector<int> seed = neighbors(i);
    if (static_cast<int>(seed.size()) < min_pts) continue;  // noise unless claimed later
    model.assignments[i] = cluster;
    std::deque<int> queue(seed.begin(), seed.end());
    while (!queue.empty()) {
      int j = queue.front();
      queue.pop_front();
      if (model.assignments[j] == -1) model.assignments[j] = cluster;  // border claim
      if (visited[j]) continue;
      visited[j] = 1;
      model.assignments[j] = cluster;
      std::vector<int> nb = neighbors(j);
      if (static_cast<int>(nb.size()) >= min_pts)
        queue.insert(queue.end(), nb.begin(), nb.end());
    }
    ++cluster;
  }

  model.centers.assign(cluster, {0.0, 0.0});
  model.member_counts.assign(cluster, 0);
  for (int i = 0; i < n; ++i) {
    int c = model.assignments[i];
    if (c < 0) continue;
    model.centers[c].lat += points[i].lat;
    model.centers[c].lon += points[i].lon;
    ++model.member_counts[c];
  }
  for (int c = 0; c < cluster; ++c) {
    model.centers[c].lat /= model.member_counts[c];
    model.centers[c].lon /= model.member_counts[c];
  }
  return model;
}

std::vector<int> to_symbol_sequence(const std::vector<GpsPoint>& traj,
                                    const std::vector<int>& assignments,
                                    const ClusterModel& model, double stride_s) {
  if (!(stride_s > 0.0)) throw std::invalid_argument("to_symbol_sequence: stride must be > 0");
  if (!assignments.empty() && assignments.size() != traj.size())
    throw std::invalid_argument("to_symbol_sequence: assignment length mismatch");
  std::vector<int> out;
  int64_t next_time = 0;
  bool first = true;
  for (size_t i = 0; i < traj.size(); ++i) {
    if (!first && traj[i].timestamp < next_time) continue;
    first = false;
    next_time = traj[i].timestamp + static_cast<int64_t>(stride_s);
    int c = assignments.empty() ? -1 : assignments[i];
    if (c < 0) {
      // attach to the nearest center if it is close enough, otherwise drop
      double best = 2.0 * model.eps_m;
      for (size_t k = 0; k < model.centers.size(); ++k) {
        double dist =
            haversine_km({traj[i].lat, traj[i].lon}, model.centers[k]) * 1000.0;
        if (dist <= best) {
          best = dist;
          c = static_cast<int>(k);
        }
      }
      if (c < 0) continue;
    }
    out.push_back(c);
  }
  return out;
}

UserModel build_user_model(const std::vector<std::vector<int>>& sequences,
                           const ClusterModel& model, double alpha) {
  if (sequences.empty()) throw std::invalid_argument("build_user_model: no sequences");
  StateSpace space = StateSpace::from_centers(model.centers);
  UserModel um{estimate_empirical_chain(space, sequences, alpha), geo_centers(model.centers),
               InitialDistribution{}};
  int k = space.size;
  std::vector<double> counts(k, alpha);
  double total = alpha * k;
  for (const auto& seq : sequences) {
    if (seq.empty()) continue;
    counts[seq.front()] += 1.0;
    total += 1.0;
  }
  um.init.probs.resize(k);
  for (int i = 0; i < k; ++i) um.init.probs[i] = counts[i] / total;
  return um;
}

void save_cluster_csv(const ClusterModel& model, const std::string& path,
                      const std::string& provenance) {
  std::ostringstream out;
  out << "# " << provenance << "\n";
  out << "id,lat,lon,member_count\n";
  for (size_t c = 0; c < model.centers.size(); ++c)
    out << c << ',' << fmt_double(model.centers[c].lat) << ','
        << fmt_double(model.centers[c].lon) << ',' << model.member_counts[c] << "\n";
  atomic_write(path, out.str());
}

void save_sequences_csv(const std::vector<std::vector<int>>& sequences, const std::string& path,
                        const std::string& provenance) {
  std::ostringstream out;
  out << "# " << provenance << "\n";
  for (const auto& seq : sequences) {
    for (size_t i = 0; i < seq.size(); ++i) {
      if (i) out << ',';
      out << seq[i];
    }
    out << "\n";
  }
  atomic_write(path, out.str());
}

std::vector<std::vector<int>> load_sequences_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_sequences_csv: cannot open " + path);
  std::vector<std::vector<int>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<int> seq;
    for (const std::string& f : split_csv_line(line)) seq.push_back(std::stoi(f));
    out.push_back(std::move(seq));
  }
  return out;
}

}  // namespace put
