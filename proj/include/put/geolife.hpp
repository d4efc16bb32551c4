#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "put/distortion.hpp"
#include "put/markov.hpp"
#include "put/state_space.hpp"

namespace put {

struct GpsPoint {
  double lat = 0.0;
  double lon = 0.0;
  int64_t timestamp = 0;  // seconds since the Unix epoch, UTC
};

// One PLT file: 6 header lines, then records
// "lat,lon,0,altitude_ft,days_fractional,date,time".
std::vector<GpsPoint> parse_plt(const std::string& text);
std::vector<GpsPoint> load_plt(const std::string& path);

int64_t days_from_civil(int y, int m, int d);

struct ClusterModel {
  std::vector<LatLon> centers;
  std::vector<int> assignments;  // per input point; -1 marks noise
  std::vector<int> member_counts;
  double eps_m = 0.0;
  int min_pts = 0;
};

// Great-circle-metre DBSCAN; clusters are numbered in order of discovery, so
// the labeling is deterministic for a fixed input order.
ClusterModel dbscan(const std::vector<GpsPoint>& points, double eps_m, int min_pts);

// Fixed-stride resampling followed by cluster lookup. assignments aligns with
// traj (pass empty to treat every point as unassigned); unassigned points
// attach to the nearest center within 2*eps_m and are dropped beyond that.
// Consecutive duplicates are retained.
std::vector<int> to_symbol_sequence(const std::vector<GpsPoint>& traj,
                                    const std::vector<int>& assignments,
                                    const ClusterModel& model, double stride_s);

struct UserModel {
  TransitionMatrix chain;
  DistortionMatrix distortion;  // km between cluster centers
  InitialDistribution init;
};

UserModel build_user_model(const std::vector<std::vector<int>>& sequences,
                           const ClusterModel& model, double alpha);

void save_cluster_csv(const ClusterModel& model, const std::string& path,
                      const std::string& provenance);
void save_sequences_csv(const std::vector<std::vector<int>>& sequences, const std::string& path,
                        const std::string& provenance);
std::vector<std::vector<int>> load_sequences_csv(const std::string& path);

}  // namespace put
