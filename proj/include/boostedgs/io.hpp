#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "field.hpp"

namespace bgs {

using json = nlohmann::ordered_json;

inline constexpr const char* kFormatVersion = "boostedgs-report-v1";

namespace detail {

inline std::uint64_t to_le_bits(double x) {
  std::uint64_t u = std::bit_cast<std::uint64_t>(x);
  if constexpr (std::endian::native == std::endian::big) {
    u = ((u & 0x00000000000000ffULL) << 56) | ((u & 0x000000000000ff00ULL) << 40) |
        ((u & 0x0000000000ff0000ULL) << 24) | ((u & 0x00000000ff000000ULL) << 8) |
        ((u & 0x000000ff00000000ULL) >> 8) | ((u & 0x0000ff0000000000ULL) >> 24) |
        ((u & 0x00ff000000000000ULL) >> 40) | ((u & 0xff00000000000000ULL) >> 56);
  }
  return u;
}

inline double from_le_bits(std::uint64_t u) {
  if constexpr (std::endian::native == std::endian::big) {
    u = ((u & 0x00000000000000ffULL) << 56) | ((u & 0x000000000000ff00ULL) << 40) |
        ((u & 0x0000000000ff0000ULL) << 24) | ((u & 0x00000000ff000000ULL) << 8) |
        ((u & 0x000000ff00000000ULL) >> 8) | ((u & 0x0000ff0000000000ULL) >> 24) |
        ((u & 0x00ff000000000000ULL) >> 40) | ((u & 0xff00000000000000ULL) >> 56);
  }
  return std::bit_cast<double>(u);
}

}  // namespace detail

// Binary dump: little-endian 64-bit float pairs (re, im), row-major, no header.
// The sidecar <path>.json records {dim, half_width, points_per_dim, params}.
inline void dump_field(const Field& f, const std::string& path, const json& params = json::object()) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("dump_field: cannot open " + path);
  std::vector<std::uint64_t> buf(2 * f.values().size());
  std::size_t j = 0;
  for (const auto& z : f.values()) {
    buf[j++] = detail::to_le_bits(z.real());
    buf[j++] = detail::to_le_bits(z.imag());
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(std::uint64_t)));
  if (!out) throw std::runtime_error("dump_field: write failed for " + path);

  json meta;
  meta["dim"] = f.grid().dim();
  meta["half_width"] = f.grid().half_width();
  meta["points_per_dim"] = f.grid().points();
  meta["params"] = params;
  std::ofstream ms(path + ".json");
  if (!ms) throw std::runtime_error("dump_field: cannot open " + path + ".json");
  ms << meta.dump(2) << "\n";
}

inline Field load_field(const std::string& path) {
  std::ifstream ms(path + ".json");
  if (!ms) throw std::runtime_error("load_field: missing sidecar " + path + ".json");
  json meta = json::parse(ms);
  Grid g = Grid::make(meta.at("dim").get<int>(), meta.at("half_width").get<double>(),
                      meta.at("points_per_dim").get<int>(), meta.at("dim").get<int>() == 1);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_field: cannot open " + path);
  std::vector<std::uint64_t> buf(2 * g.size());
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(std::uint64_t)));
  if (static_cast<std::size_t>(in.gcount()) != buf.size() * sizeof(std::uint64_t))
    throw std::runtime_error("load_field: truncated dump " + path);
  std::vector<cd> vals(g.size());
  for (std::size_t i = 0; i < vals.size(); ++i)
    vals[i] = cd(detail::from_le_bits(buf[2 * i]), detail::from_le_bits(buf[2 * i + 1]));
  return Field(std::move(g), std::move(vals));
}

// JSON value for a double that may be non-finite (reports never store raw inf)
inline json finite_or_flag(double x) {
  if (std::isnan(x)) return json("nan");
  if (std::isinf(x)) return json(x > 0 ? "+inf" : "-inf");
  return json(x);
}

inline json make_report(const json& config, json payload) {
  json r;
  r["format_version"] = kFormatVersion;
  r["config"] = config;
  r["result"] = std::move(payload);
  return r;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_text: cannot open " + path);
  out << text;
  if (!out) throw std::runtime_error("write_text: write failed for " + path);
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// minimal CSV writer; all cells are written with max_digits10 precision
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns) : cols_(std::move(columns)) {
    for (std::size_t i = 0; i < cols_.size(); ++i) {
      if (i) os_ << ",";
      os_ << cols_[i];
    }
    os_ << "\n";
    os_.precision(17);
  }
  void row(const std::vector<double>& vals) {
    if (vals.size() != cols_.size()) throw std::invalid_argument("CsvWriter: column mismatch");
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (i) os_ << ",";
      os_ << vals[i];
    }
    os_ << "\n";
  }
  std::string str() const { return os_.str(); }
  void save(const std::string& path) const { write_text(path, os_.str()); }

 private:
  std::vector<std::string> cols_;
  std::ostringstream os_;
};

}  // namespace bgs
