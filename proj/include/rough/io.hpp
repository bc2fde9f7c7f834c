#pragma once

// CSV emitters for paths, increments, rate studies and probes, and the JSON
// tensor-series file format with bit-exact round trip. CSV floats are printed
// with 17 significant digits so parsing them back reproduces the double.

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rough/grid.hpp"
#include "rough/rde.hpp"
#include "rough/signature.hpp"
#include "rough/young.hpp"

namespace rough {

inline std::string format17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

/// Header row `t,c0,...`, one row per grid time.
inline void write_csv(std::ostream& os, const GridPath& path) {
  os << "t";
  for (std::size_t c = 0; c < path.dim(); ++c) os << ",c" << c;
  os << "\n";
  for (std::size_t i = 0; i < path.points(); ++i) {
    os << format17(path.grid()[i]);
    for (double v : path.value(i)) os << "," << format17(v);
    os << "\n";
  }
}

/// Header row `i,j,c0,...`, one row per ordered pair i < j.
inline void write_csv(std::ostream& os, const Increment2& r) {
  os << "i,j";
  for (std::size_t c = 0; c < r.comps(); ++c) os << ",c" << c;
  os << "\n";
  for (std::size_t i = 0; i + 1 < r.points(); ++i)
    for (std::size_t j = i + 1; j < r.points(); ++j) {
      os << i << "," << j;
      for (double v : r.pair(i, j)) os << "," << format17(v);
      os << "\n";
    }
}

/// Header row `level,mesh,value,diff_to_finest` (value = max-abs component).
inline void write_csv(std::ostream& os, const std::vector<DyadicSumRow>& rows) {
  os << "level,mesh,value,diff_to_finest\n";
  for (const auto& row : rows) {
    double v = 0.0;
    for (double x : row.value) v = std::max(v, std::abs(x));
    os << row.level << "," << format17(row.mesh) << "," << format17(v) << ","
       << format17(row.diff_to_finest) << "\n";
  }
}

inline void write_csv(std::ostream& os, const std::vector<ProbeRow>& rows) {
  os << "epsilon,distance\n";
  for (const auto& row : rows)
    os << format17(row.eps) << "," << format17(row.distance) << "\n";
}

/// Tensor-series file: {dim, level, times, adjacent: [[level-k flat arrays]]}.
inline nlohmann::ordered_json to_json(const TensorFunc& z) {
  nlohmann::ordered_json j;
  j["dim"] = z.dim();
  j["level"] = z.depth();
  j["times"] = z.grid().times();
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const auto& s : z.adjacent()) {
    nlohmann::ordered_json lv = nlohmann::ordered_json::array();
    for (const auto& level : s.levels) lv.push_back(level);
    cells.push_back(std::move(lv));
  }
  j["adjacent"] = std::move(cells);
  j["p"] = z.p_rough();
  return j;
}

inline TensorFunc tensor_func_from_json(const nlohmann::json& j) {
  const std::size_t dim = j.at("dim").get<std::size_t>();
  const std::size_t depth = j.at("level").get<std::size_t>();
  TimeGrid grid(j.at("times").get<std::vector<double>>());
  std::vector<TensorSeries> adjacent;
  for (const auto& cell : j.at("adjacent")) {
    TensorSeries s;
    s.dim = dim;
    for (const auto& level : cell) s.levels.push_back(level.get<std::vector<double>>());
    detail::require(s.depth() == depth, "tensor_func_from_json: level count mismatch");
    adjacent.push_back(std::move(s));
  }
  const double p = j.contains("p") ? j.at("p").get<double>() : 2.0;
  return TensorFunc(std::move(grid), dim, depth, std::move(adjacent), p);
}

}  // namespace rough
