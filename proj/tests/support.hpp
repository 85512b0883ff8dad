#pragma once

// Independent oracles and generators shared by the unit and acceptance tests.
// Nothing here calls into the code under test beyond constructing inputs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "rssfp/fingerprint.hpp"
#include "rssfp/segmentation.hpp"

namespace testsupport {

using Gen = std::mt19937_64;

inline double uniform(Gen& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline int uniform_int(Gen& g, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(g);
}

inline std::string beacon_name(int i) { return "b" + std::to_string(i); }

/// Random vector over a random subset (at least one) of beacons b0..b{z-1}.
inline rssfp::RssVector random_vector(Gen& g, int z, double max_rss = 100.0) {
  rssfp::RssVector::Map m;
  for (int i = 0; i < z; ++i) {
    if (uniform(g, 0, 1) < 0.75) m[beacon_name(i)] = uniform(g, 0, max_rss);
  }
  if (m.empty()) m[beacon_name(uniform_int(g, 0, z - 1))] = uniform(g, 0, max_rss);
  return rssfp::RssVector(std::move(m));
}

/// Plain loop over the union of keys; only keys present on both sides count.
inline double brute_distance(const std::map<std::string, double>& a,
                             const std::map<std::string, double>& b) {
  double sum = 0.0;
  for (const auto& [k, va] : a) {
    for (const auto& [j, vb] : b) {
      if (k == j) sum += (va - vb) * (va - vb);
    }
  }
  return std::sqrt(sum);
}

inline bool share_key(const std::map<std::string, double>& a, const std::map<std::string, double>& b) {
  for (const auto& kv : a) {
    if (b.count(kv.first)) return true;
  }
  return false;
}

/// Dense Gaussian elimination with partial pivoting; solves A X = B in place.
inline std::vector<std::vector<double>> gauss_solve(std::vector<std::vector<double>> a,
                                                    std::vector<std::vector<double>> b) {
  const std::size_t n = a.size();
  const std::size_t cols = b.empty() ? 0 : b[0].size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      for (std::size_t k = 0; k < cols; ++k) b[r][k] -= f * b[c][k];
    }
  }
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < cols; ++k) b[r][k] /= a[r][r];
  }
  return b;
}

/// Ridge RBF weights written out from the definition: Gaussian kernels at
/// every training vector (missing readings as 0), width = second smallest
/// distance to the other vectors floored at 1, bias column, normal equations.
inline std::vector<std::vector<double>> oracle_rbf_weights(
    const std::vector<std::vector<double>>& x, const std::vector<std::pair<double, double>>& y,
    double lambda) {
  const std::size_t m = x.size();
  auto dist = [&](std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t k = 0; k < x[i].size(); ++k) s += (x[i][k] - x[j][k]) * (x[i][k] - x[j][k]);
    return std::sqrt(s);
  };
  std::vector<double> width(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> d;
    for (std::size_t j = 0; j < m; ++j) {
      if (j != i) d.push_back(dist(i, j));
    }
    std::sort(d.begin(), d.end());
    const double med3 = d[1];  // median of {d0, d1, d2}
    width[i] = med3 < 1.0 ? 1.0 : med3;
  }
  std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 1.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = dist(i, j);
      a[i][j] = std::exp(-(d * d) / (2 * width[j] * width[j]));
    }
  }
  std::vector<std::vector<double>> ata(m + 1, std::vector<double>(m + 1, 0.0));
  std::vector<std::vector<double>> aty(m + 1, std::vector<double>(2, 0.0));
  for (std::size_t r = 0; r <= m; ++r) {
    for (std::size_t c = 0; c <= m; ++c) {
      for (std::size_t i = 0; i < m; ++i) ata[r][c] += a[i][r] * a[i][c];
    }
    ata[r][r] += lambda;
    for (std::size_t i = 0; i < m; ++i) {
      aty[r][0] += a[i][r] * y[i].first;
      aty[r][1] += a[i][r] * y[i].second;
    }
  }
  return gauss_solve(ata, aty);
}

/// Builds a random database: z beacons, n points at distinct coordinates on a
/// 0.25 m lattice inside [0,w]x[0,h], optionally split into vertical strips
/// committed as subareas.
inline rssfp::FingerprintDatabase random_database(Gen& g, int z, int n, int strips,
                                                  double w = 20.0, double h = 10.0) {
  rssfp::FingerprintDatabase db;
  db.set_meta(rssfp::DatabaseMeta{"generated-" + std::to_string(uniform_int(g, 0, 9999)),
                                  uniform(g, 0, 1) < 0.5 ? "" : "2024-01-01T00:00:00Z", 1});
  db.set_bounds(rssfp::Rect{0, 0, w, h});
  for (int i = 0; i < z; ++i) {
    db.add_beacon(rssfp::BeaconNode{beacon_name(i), {uniform(g, 0, w), uniform(g, 0, h)},
                                    "tx " + std::to_string(i)});
  }
  int placed = 0, attempts = 0;
  while (placed < n && attempts < n * 50) {
    ++attempts;
    const rssfp::Point p{std::round(uniform(g, 0, w) * 4) / 4, std::round(uniform(g, 0, h) * 4) / 4};
    bool taken = false;
    for (const auto& q : db.reference_points()) taken = taken || q.position == p;
    if (taken) continue;
    db.insert_point(p, random_vector(g, z));
    ++placed;
  }
  for (int s = 0; s < strips; ++s) {
    const rssfp::Rect r{w * s / strips, 0, w * (s + 1) / strips, h};
    rssfp::commit_region_unchecked(db, r);
  }
  return db;
}

}  // namespace testsupport
