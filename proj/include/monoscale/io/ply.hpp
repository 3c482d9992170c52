#pragma once

// ASCII PLY point clouds (x y z vertices). The unit tag travels in a
// "comment units <tag>" header line.

#include <filesystem>
#include <string>

#include "monoscale/errors.hpp"
#include "monoscale/io/text.hpp"
#include "monoscale/mapping.hpp"

namespace monoscale::io {

inline std::string ply_to_string(const PointCloud& c) {
  std::string out;
  out.reserve(64 * c.size() + 200);
  out += "ply\nformat ascii 1.0\ncomment units ";
  out += to_string(c.units);
  out += "\nelement vertex " + std::to_string(c.size()) +
         "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  for (const auto& p : c.points) {
    out += format_double(p.x());
    out += ' ';
    out += format_double(p.y());
    out += ' ';
    out += format_double(p.z());
    out += '\n';
  }
  return out;
}

inline void write_ply(const std::filesystem::path& path, const PointCloud& c) {
  write_file(path, ply_to_string(c));
}

/// Reads x, y, z from the first three vertex properties; other vertex
/// properties are skipped. Files without a units comment get `fallback`.
inline PointCloud parse_ply(const std::string& text, const std::string& path,
                            CloudUnits fallback = CloudUnits::kMeters) {
  const auto ls = lines(text);
  if (ls.empty() || tokens(ls[0]).empty() || tokens(ls[0])[0] != "ply") {
    throw IoError(path, "not a PLY file");
  }
  PointCloud c;
  c.units = fallback;
  std::size_t vertices = 0, properties = 0, i = 1;
  bool in_vertex = false, have_vertex = false, ended = false;
  std::vector<std::string> names;
  for (; i < ls.size(); ++i) {
    const auto t = tokens(ls[i]);
    if (t.empty()) continue;
    const auto err = [&](const std::string& what) {
      return IoError(path, "line " + std::to_string(i + 1) + ": " + what);
    };
    if (t[0] == "format") {
      if (t.size() < 2 || t[1] != "ascii") throw err("only ASCII PLY is supported");
    } else if (t[0] == "comment") {
      if (t.size() >= 3 && t[1] == "units") {
        if (t[2] == "meters") c.units = CloudUnits::kMeters;
        else if (t[2] == "unscaled-map-units") c.units = CloudUnits::kUnscaled;
        else throw err("unknown units '" + std::string(t[2]) + "'");
      }
    } else if (t[0] == "element") {
      if (t.size() != 3) throw err("malformed element line");
      in_vertex = t[1] == "vertex";
      if (in_vertex) {
        if (have_vertex) throw err("duplicate vertex element");
        double n = 0.0;
        if (!parse_double(t[2], n) || n < 0 || n != static_cast<double>(static_cast<std::size_t>(n))) {
          throw err("bad vertex count");
        }
        vertices = static_cast<std::size_t>(n);
        have_vertex = true;
      } else if (t[2] != "0") {
        throw err("only vertex data is supported");
      }
    } else if (t[0] == "property") {
      if (in_vertex) {
        if (t.size() < 3 || t[1] == "list") throw err("unsupported vertex property");
        names.emplace_back(t.back());
        ++properties;
      }
    } else if (t[0] == "end_header") {
      ended = true;
      ++i;
      break;
    } else if (t[0] != "obj_info") {
      throw err("unexpected header line");
    }
  }
  if (!ended) throw IoError(path, "missing end_header");
  if (!have_vertex) throw IoError(path, "no vertex element");
  if (properties < 3 || names[0] != "x" || names[1] != "y" || names[2] != "z") {
    throw IoError(path, "vertex properties must start with x, y, z");
  }
  c.points.reserve(vertices);
  for (; i < ls.size() && c.points.size() < vertices; ++i) {
    const auto t = tokens(ls[i]);
    if (t.empty()) continue;
    if (t.size() != properties) {
      throw IoError(path, "line " + std::to_string(i + 1) + ": expected " + std::to_string(properties) +
                              " values");
    }
    const auto v = parse_numbers({t[0], t[1], t[2]}, path, i + 1);
    c.points.emplace_back(v[0], v[1], v[2]);
    if (!c.points.back().allFinite()) {
      throw IoError(path, "line " + std::to_string(i + 1) + ": non-finite coordinate");
    }
  }
  if (c.points.size() != vertices) {
    throw IoError(path, "expected " + std::to_string(vertices) + " vertices, found " +
                            std::to_string(c.points.size()));
  }
  return c;
}

inline PointCloud read_ply(const std::filesystem::path& path, CloudUnits fallback = CloudUnits::kMeters) {
  return parse_ply(read_file(path), path.string(), fallback);
}

}  // namespace monoscale::io
