#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "vicsek/besov.hpp"
#include "vicsek/energy.hpp"
#include "vicsek/energy_measure.hpp"
#include "vicsek/errors.hpp"
#include "vicsek/structural_checks.hpp"

namespace vicsek {

using Json = nlohmann::json;

// FNV-1a over the canonical (sorted-key, compact) dump.
inline std::uint64_t config_hash(const Json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Round-trippable, locale-independent.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns, std::uint64_t hash)
      : out_(path), columns_(columns.size()) {
    if (!out_) throw ResourceError("cannot open " + path.string() + " for writing", path.string());
    out_ << "# config-hash " << hex64(hash) << "\n";
    row(columns);
  }
  void row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw InvalidArgument("csv row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
  }

 private:
  std::ofstream out_;
  std::size_t columns_;
};

inline void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ResourceError("cannot open " + path.string() + " for writing", path.string());
  out << j.dump(2) << "\n";
}

inline Json to_json(const EnergyReport& r) {
  Json j;
  j["energies"] = Json::array();
  for (double e : r.energies) j["energies"].push_back(fmt(e));
  if (r.exact) {
    j["energies_exact"] = Json::array();
    for (const Rational& q : *r.exact) j["energies_exact"].push_back(to_string(q));
  }
  j["plateau"] = r.plateau;
  j["limit"] = fmt(r.limit);
  if (r.limit_exact) j["limit_exact"] = to_string(*r.limit_exact);
  j["monotone"] = r.monotone;
  return j;
}

inline Json to_json(const StructuralReport& r) {
  return Json{{"level", r.level},
              {"product", {{"lhs", fmt(r.product_lhs)}, {"rhs", fmt(r.product_rhs)}, {"ok", r.product_ok}}},
              {"contraction", {{"lhs", fmt(r.contraction_lhs)}, {"rhs", fmt(r.contraction_rhs)}, {"ok", r.contraction_ok}}},
              {"spectral_gap", fmt(r.spectral_gap)},
              {"morrey", fmt(r.morrey)},
              {"locality", {{"separated", r.supports_separated}, {"ok", r.locality_ok}}},
              {"clarkson", {{"residual", fmt(r.clarkson_residual)}, {"ok", r.clarkson_ok}}}};
}

inline void write_cell_measure(const std::filesystem::path& path, const CellMeasure& cm, const RatioSequence& rs, std::uint64_t hash) {
  CsvWriter w(path, {"word", "mass", "mass_exact"}, hash);
  for (std::size_t i = 0; i < cm.mass.size(); ++i)
    w.row({to_string(word_from_index(rs, cm.level, i)), fmt(cm.mass[i]), cm.exact ? to_string((*cm.exact)[i]) : ""});
}

inline void write_histogram(const std::filesystem::path& path, const PushforwardHistogram& h, std::uint64_t hash) {
  CsvWriter w(path, {"bin_left", "bin_right", "mass"}, hash);
  for (std::size_t i = 0; i < h.mass.size(); ++i) w.row({fmt(h.bin_left(i)), fmt(h.bin_right(i)), fmt(h.mass[i])});
}

}  // namespace vicsek
