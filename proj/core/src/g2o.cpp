#include "robo/g2o.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace robo {

namespace {

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
  throw G2oParseError("g2o parse error at line " + std::to_string(line_no) + ": " + what);
}

struct RawVertex {
  std::uint64_t id;
  Pose pose;
};

struct RawEdge {
  std::uint64_t from, to;
  Pose transform;
  double kappa, tau;
};

MatD rot2(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  MatD m(2, 2);
  m << c, -s, s, c;
  return m;
}

MatD quat_to_matrix(double qx, double qy, double qz, double qw, std::size_t line_no) {
  Eigen::Quaterniond q(qw, qx, qy, qz);
  if (q.norm() < 1e-12) fail(line_no, "zero quaternion");
  return MatD(q.normalized().toRotationMatrix());
}

// Fixed-count token split; returns false on wrong count or a bad number.
bool parse_doubles(std::istringstream& ss, double* out, int count) {
  for (int i = 0; i < count; ++i)
    if (!(ss >> out[i])) return false;
  std::string rest;
  ss >> rest;
  return rest.empty();
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::pair<double, double> extract_precisions(const Eigen::MatrixXd& info) {
  const auto n = info.rows();
  if (info.cols() != n || (n != 3 && n != 6))
    throw std::invalid_argument("extract_precisions: expected 3x3 or 6x6 matrix");
  if ((info - info.transpose()).norm() > 1e-9 * std::max(1.0, info.norm()))
    throw std::invalid_argument("extract_precisions: information matrix not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(info);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("extract_precisions: information matrix not positive-definite");
  const int trans_dim = (n == 3) ? 2 : 3;
  const double tau = info.diagonal().head(trans_dim).mean();
  const double kappa = info.diagonal().tail(n - trans_dim).mean();
  return {kappa, tau};
}

PoseGraph parse_g2o(std::istream& in, std::vector<std::string>* warnings) {
  std::vector<RawVertex> vertices;
  std::vector<RawEdge> raw_edges;
  int dimension = 0;  // 0 until first record decides

  auto set_dimension = [&](int d, std::size_t line_no) {
    if (dimension == 0)
      dimension = d;
    else if (dimension != d)
      fail(line_no, "mixed 2D and 3D records");
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;

    if (tag == "VERTEX_SE2") {
      std::uint64_t id;
      double v[3];
      if (!(ss >> id) || !parse_doubles(ss, v, 3)) fail(line_no, "malformed VERTEX_SE2");
      set_dimension(2, line_no);
      VecD t(2);
      t << v[0], v[1];
      vertices.push_back({id, Pose(Rotation::unchecked(rot2(v[2])), t)});
    } else if (tag == "VERTEX_SE3:QUAT") {
      std::uint64_t id;
      double v[7];
      if (!(ss >> id) || !parse_doubles(ss, v, 7)) fail(line_no, "malformed VERTEX_SE3:QUAT");
      set_dimension(3, line_no);
      VecD t(3);
      t << v[0], v[1], v[2];
      vertices.push_back({id, Pose(Rotation::unchecked(quat_to_matrix(v[3], v[4], v[5], v[6], line_no)), t)});
    } else if (tag == "EDGE_SE2") {
      std::uint64_t id1, id2;
      double v[9];
      if (!(ss >> id1 >> id2) || !parse_doubles(ss, v, 9)) fail(line_no, "malformed EDGE_SE2");
      set_dimension(2, line_no);
      if (id1 == id2) fail(line_no, "self-loop edge");
      Eigen::MatrixXd info(3, 3);
      info << v[3], v[4], v[5], v[4], v[6], v[7], v[5], v[7], v[8];
      double kappa, tau;
      try {
        std::tie(kappa, tau) = extract_precisions(info);
      } catch (const std::invalid_argument& e) {
        fail(line_no, e.what());
      }
      VecD t(2);
      t << v[0], v[1];
      raw_edges.push_back({id1, id2, Pose(Rotation::unchecked(rot2(v[2])), t), kappa, tau});
    } else if (tag == "EDGE_SE3:QUAT") {
      std::uint64_t id1, id2;
      double v[28];
      if (!(ss >> id1 >> id2) || !parse_doubles(ss, v, 28)) fail(line_no, "malformed EDGE_SE3:QUAT");
      set_dimension(3, line_no);
      if (id1 == id2) fail(line_no, "self-loop edge");
      Eigen::MatrixXd info(6, 6);
      int k = 7;
      for (int r = 0; r < 6; ++r)
        for (int c = r; c < 6; ++c) {
          info(r, c) = v[k];
          info(c, r) = v[k];
          ++k;
        }
      double kappa, tau;
      try {
        std::tie(kappa, tau) = extract_precisions(info);
      } catch (const std::invalid_argument& e) {
        fail(line_no, e.what());
      }
      VecD t(3);
      t << v[0], v[1], v[2];
      raw_edges.push_back(
          {id1, id2, Pose(Rotation::unchecked(quat_to_matrix(v[3], v[4], v[5], v[6], line_no)), t), kappa, tau});
    } else {
      if (warnings)
        warnings->push_back("line " + std::to_string(line_no) + ": unknown record type '" + tag +
                            "' skipped");
    }
  }

  // Dense id remapping preserving numeric order. Vertices referenced only
  // by edges are created with identity estimates.
  std::map<std::uint64_t, PoseId> id_map;
  for (const auto& v : vertices) id_map.emplace(v.id, 0);
  for (const auto& e : raw_edges) {
    id_map.emplace(e.from, 0);
    id_map.emplace(e.to, 0);
  }
  if (id_map.empty()) throw G2oParseError("g2o parse error: no vertices");
  PoseId next = 0;
  for (auto& [raw, dense] : id_map) dense = next++;

  PoseGraph g;
  g.dimension = dimension;
  g.poses.assign(id_map.size(), Pose::Identity(dimension));
  for (const auto& v : vertices) g.poses[id_map.at(v.id)] = v.pose;
  for (const auto& e : raw_edges) {
    RelativeMeasurement m;
    m.from = id_map.at(e.from);
    m.to = id_map.at(e.to);
    m.transform = e.transform;
    m.kappa = e.kappa;
    m.tau = e.tau;
    g.add_edge(std::move(m));
  }
  g.require_connected();
  return g;
}

void write_g2o(const PoseGraph& g, std::ostream& out) {
  const int d = g.dimension;
  for (PoseId i = 0; i < g.poses.size(); ++i) {
    const Pose& p = g.poses[i];
    if (d == 2) {
      const double theta = rotation_log(p.rotation)[0];
      out << "VERTEX_SE2 " << i << ' ' << format_double(p.translation[0]) << ' '
          << format_double(p.translation[1]) << ' ' << format_double(theta) << '\n';
    } else {
      Eigen::Quaterniond q(Eigen::Matrix3d(p.rotation.matrix()));
      if (q.w() < 0) q.coeffs() = -q.coeffs();
      out << "VERTEX_SE3:QUAT " << i;
      for (int k = 0; k < 3; ++k) out << ' ' << format_double(p.translation[k]);
      out << ' ' << format_double(q.x()) << ' ' << format_double(q.y()) << ' '
          << format_double(q.z()) << ' ' << format_double(q.w()) << '\n';
    }
  }
  for (const auto& m : g.edges) {
    if (d == 2) {
      const double theta = rotation_log(m.transform.rotation)[0];
      out << "EDGE_SE2 " << m.from << ' ' << m.to << ' '
          << format_double(m.transform.translation[0]) << ' '
          << format_double(m.transform.translation[1]) << ' ' << format_double(theta) << ' '
          << format_double(m.tau) << " 0 0 " << format_double(m.tau) << " 0 "
          << format_double(m.kappa) << '\n';
    } else {
      Eigen::Quaterniond q(Eigen::Matrix3d(m.transform.rotation.matrix()));
      if (q.w() < 0) q.coeffs() = -q.coeffs();
      out << "EDGE_SE3:QUAT " << m.from << ' ' << m.to;
      for (int k = 0; k < 3; ++k) out << ' ' << format_double(m.transform.translation[k]);
      out << ' ' << format_double(q.x()) << ' ' << format_double(q.y()) << ' '
          << format_double(q.z()) << ' ' << format_double(q.w());
      // Upper triangle of diag(tau, tau, tau, kappa, kappa, kappa).
      for (int r = 0; r < 6; ++r)
        for (int c = r; c < 6; ++c) {
          if (r == c)
            out << ' ' << format_double(r < 3 ? m.tau : m.kappa);
          else
            out << " 0";
        }
      out << '\n';
    }
  }
}

void override_noise(PoseGraph& g, double rot_noise_deg, double trans_noise_m) {
  if (rot_noise_deg <= 0.0 || trans_noise_m <= 0.0)
    throw std::invalid_argument("override_noise: noise magnitudes must be positive");
  const double sigma_rot = rot_noise_deg * M_PI / 180.0;
  const double kappa = 1.0 / (sigma_rot * sigma_rot);
  const double tau = 1.0 / (trans_noise_m * trans_noise_m);
  for (auto& m : g.edges) {
    m.kappa = kappa;
    m.tau = tau;
  }
}

}  // namespace robo
