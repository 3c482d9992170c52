#pragma once

// Line-based text form of a factor graph with its current estimates.
//
//   SCALE <log_s>
//   PRIOR <tx ty tz qw qx qy qz> <scale_prior> <6 pose info> <scale info>
//   POSE  <i> <tx ty tz qw qx qy qz>
//   FK    <i> <tx ty tz qw qx qy qz> <6 info>
//   MC    <i> <qw qx qy qz> <dtx dty dtz> <6 info> <world|literal>
//
// Lines starting with '#' are comments.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "monoscale/errors.hpp"
#include "monoscale/factor_graph.hpp"
#include "monoscale/io/text.hpp"

namespace monoscale::io {

namespace detail {

inline void put(std::string& out, double v) {
  out += ' ';
  out += format_double(v);
}

inline void put_pose(std::string& out, const Pose& p) {
  for (int k = 0; k < 3; ++k) put(out, p.translation[k]);
  const auto& q = p.rotation.quaternion();
  put(out, q.w());
  put(out, q.x());
  put(out, q.y());
  put(out, q.z());
}

inline void put_info(std::string& out, const Vector6d& info) {
  for (int k = 0; k < 6; ++k) put(out, info[k]);
}

}  // namespace detail

inline std::string graph_to_string(const FactorGraph& g) {
  std::string out = "# monoscale factor graph\n";
  out += "SCALE";
  detail::put(out, g.scale().log_value());
  out += "\nPRIOR";
  detail::put_pose(out, g.prior().pose_prior);
  detail::put(out, g.prior().scale_prior);
  detail::put_info(out, g.prior().pose_information);
  detail::put(out, g.prior().scale_information);
  out += '\n';
  for (std::size_t i = 0; i < g.pose_count(); ++i) {
    out += "POSE " + std::to_string(i);
    detail::put_pose(out, g.pose(i));
    out += '\n';
  }
  for (const auto& f : g.fk_factors()) {
    out += "FK " + std::to_string(f.index);
    detail::put_pose(out, f.delta);
    detail::put_info(out, f.information);
    out += '\n';
  }
  for (const auto& f : g.mc_factors()) {
    out += "MC " + std::to_string(f.index);
    const auto& q = f.delta_rot.quaternion();
    detail::put(out, q.w());
    detail::put(out, q.x());
    detail::put(out, q.y());
    detail::put(out, q.z());
    for (int k = 0; k < 3; ++k) detail::put(out, f.delta_trans[k]);
    detail::put_info(out, f.information);
    out += f.form == TransResidualForm::kLiteral ? " literal\n" : " world\n";
  }
  return out;
}

inline void write_graph(const std::filesystem::path& path, const FactorGraph& g) {
  write_file(path, graph_to_string(g));
}

inline FactorGraph parse_graph(const std::string& text, const std::string& path) {
  bool have_scale = false, have_prior = false;
  ScaleVar scale;
  PriorFactor prior;
  std::map<std::size_t, Pose> poses;
  std::map<std::size_t, FkFactor> fks;
  std::map<std::size_t, McFactor> mcs;

  const auto ls = lines(text);
  for (std::size_t n = 0; n < ls.size(); ++n) {
    const std::size_t line = n + 1;
    const auto t = tokens(ls[n]);
    if (t.empty() || t[0].front() == '#') continue;
    auto err = [&](const std::string& what) {
      return IoError(path, "line " + std::to_string(line) + ": " + what);
    };
    auto numbers = [&](std::size_t count, std::size_t from) {
      if (t.size() < from + count) throw err("expected " + std::to_string(count + from - 1) + " fields");
      std::vector<std::string_view> f(t.begin() + static_cast<long>(from),
                                      t.begin() + static_cast<long>(from + count));
      return parse_numbers(f, path, line);
    };
    auto index = [&]() {
      const auto v = numbers(1, 1)[0];
      if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) throw err("bad index");
      return static_cast<std::size_t>(v);
    };
    auto pose_at = [](const std::vector<double>& v, std::size_t k) {
      return Pose(Rotation(v[k + 3], v[k + 4], v[k + 5], v[k + 6]), Vector3d(v[k], v[k + 1], v[k + 2]));
    };
    auto info_at = [](const std::vector<double>& v, std::size_t k) {
      Vector6d d;
      for (int i = 0; i < 6; ++i) d[i] = v[k + static_cast<std::size_t>(i)];
      return d;
    };
    auto exact = [&](std::size_t count) {
      if (t.size() != count) throw err("expected " + std::to_string(count - 1) + " fields");
    };

    if (t[0] == "SCALE") {
      exact(2);
      scale = ScaleVar::from_log(numbers(1, 1)[0]);
      have_scale = true;
    } else if (t[0] == "PRIOR") {
      exact(16);
      const auto v = numbers(15, 1);
      prior.pose_prior = pose_at(v, 0);
      prior.scale_prior = v[7];
      prior.pose_information = info_at(v, 8);
      prior.scale_information = v[14];
      have_prior = true;
    } else if (t[0] == "POSE") {
      exact(9);
      const std::size_t i = index();
      if (!poses.emplace(i, pose_at(numbers(7, 2), 0)).second) throw err("duplicate pose");
    } else if (t[0] == "FK") {
      exact(15);
      FkFactor f;
      f.index = index();
      const auto v = numbers(13, 2);
      f.delta = pose_at(v, 0);
      f.information = info_at(v, 7);
      if (!fks.emplace(f.index, f).second) throw err("duplicate FK factor");
    } else if (t[0] == "MC") {
      exact(16);
      McFactor f;
      f.index = index();
      const auto v = numbers(13, 2);
      f.delta_rot = Rotation(v[0], v[1], v[2], v[3]);
      f.delta_trans = Vector3d(v[4], v[5], v[6]);
      f.information = info_at(v, 7);
      if (t[15] == "world") f.form = TransResidualForm::kWorldAligned;
      else if (t[15] == "literal") f.form = TransResidualForm::kLiteral;
      else throw err("unknown residual form '" + std::string(t[15]) + "'");
      if (!mcs.emplace(f.index, f).second) throw err("duplicate MC factor");
    } else {
      throw err("unknown record '" + std::string(t[0]) + "'");
    }
  }
  if (!have_scale) throw IoError(path, "missing SCALE record");
  if (!have_prior) throw IoError(path, "missing PRIOR record");

  std::vector<Pose> pose_list;
  for (const auto& [i, p] : poses) {
    if (i != pose_list.size()) throw IoError(path, "pose indices must be 0..n without gaps");
    pose_list.push_back(p);
  }
  std::vector<FkFactor> fk_list;
  std::vector<McFactor> mc_list;
  for (const auto& [i, f] : fks) fk_list.push_back(f);
  for (const auto& [i, f] : mcs) mc_list.push_back(f);
  try {
    return FactorGraph::from_parts(prior, scale, pose_list, fk_list, mc_list);
  } catch (const Error& e) {
    throw IoError(path, e.what());
  }
}

inline FactorGraph read_graph(const std::filesystem::path& path) {
  return parse_graph(read_file(path), path.string());
}

}  // namespace monoscale::io
