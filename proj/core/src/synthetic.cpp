#include "robo/synthetic.hpp"

#include "robo/random.hpp"

#include <algorithm>
#include <cmath>

namespace robo {

namespace {

constexpr double kMaxPrecision = 1e12;

double precision_from_sigma(double sigma) {
  if (sigma <= 0.0) return kMaxPrecision;
  return std::min(kMaxPrecision, 1.0 / (sigma * sigma));
}

VecD forward_step(int d) {
  VecD t = VecD::Zero(d);
  t[0] = 1.0;  // unit step along the local x axis
  return t;
}

Rotation random_rotation_increment(DeterministicRng& rng, int d, double sigma) {
  VecD v(d == 2 ? 1 : 3);
  for (int k = 0; k < v.size(); ++k) v[k] = sigma * rng.normal();
  return rotation_exp(v);
}

Estimates chain_ground_truth(const SyntheticSpec& spec, DeterministicRng& rng) {
  // Gentle random turns so rotations are exercised.
  Estimates gt;
  gt.reserve(spec.n_poses);
  Pose current = Pose::Identity(spec.dimension);
  gt.push_back(current);
  for (int i = 1; i < spec.n_poses; ++i) {
    const Rotation turn = random_rotation_increment(rng, spec.dimension, 0.12);
    current = compose(current, Pose(turn, forward_step(spec.dimension)));
    gt.push_back(current);
  }
  return gt;
}

Estimates ring_ground_truth(const SyntheticSpec& spec) {
  // n poses on a circle with unit arc spacing, heading tangent.
  Estimates gt;
  gt.reserve(spec.n_poses);
  const double radius = spec.n_poses / (2.0 * M_PI);
  for (int i = 0; i < spec.n_poses; ++i) {
    const double phi = 2.0 * M_PI * i / spec.n_poses;
    const double heading = phi + M_PI / 2.0;
    VecD t = VecD::Zero(spec.dimension);
    t[0] = radius * std::cos(phi);
    t[1] = radius * std::sin(phi);
    VecD v(spec.dimension == 2 ? 1 : 3);
    v.setZero();
    v[v.size() - 1] = heading;  // rotation about z (or the 2D angle)
    gt.emplace_back(rotation_exp(v), t);
  }
  return gt;
}

Estimates grid_ground_truth(const SyntheticSpec& spec, DeterministicRng& rng,
                            std::vector<std::pair<int, int>>* grid_neighbors) {
  // Snake path over a W x H lattice so consecutive ids are adjacent;
  // lattice neighbors across rows become loop-closure candidates.
  const int w = std::max(2, static_cast<int>(std::lround(std::sqrt(double(spec.n_poses)))));
  Estimates gt;
  gt.reserve(spec.n_poses);
  std::vector<std::vector<int>> cell_id;
  for (int i = 0; i < spec.n_poses; ++i) {
    const int row = i / w;
    const int col_in_row = i % w;
    const int col = (row % 2 == 0) ? col_in_row : w - 1 - col_in_row;
    if (row >= static_cast<int>(cell_id.size())) cell_id.emplace_back(w, -1);
    cell_id[row][col] = i;
    VecD t = VecD::Zero(spec.dimension);
    t[0] = col;
    t[1] = row;
    if (spec.dimension == 3) t[2] = 0.3 * rng.normal();
    gt.emplace_back(random_rotation_increment(rng, spec.dimension, 0.3), t);
  }
  for (std::size_t row = 0; row + 1 < cell_id.size(); ++row)
    for (int col = 0; col < w; ++col) {
      const int a = cell_id[row][col];
      const int b = cell_id[row + 1][col];
      if (a >= 0 && b >= 0 && std::abs(a - b) > 1) grid_neighbors->push_back({a, b});
    }
  return gt;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (n_poses < 2) throw std::invalid_argument("synthetic spec: n_poses must be >= 2");
  if (dimension != 2 && dimension != 3)
    throw std::invalid_argument("synthetic spec: dimension must be 2 or 3");
  if (rot_noise_deg < 0.0 || trans_noise_m < 0.0)
    throw std::invalid_argument("synthetic spec: noise magnitudes must be nonnegative");
  if (loop_closure_prob < 0.0 || loop_closure_prob > 1.0)
    throw std::invalid_argument("synthetic spec: loop_closure_prob must be in [0, 1]");
}

SyntheticResult generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  DeterministicRng rng(spec.seed);

  std::vector<std::pair<int, int>> extra_edges;
  Estimates gt;
  switch (spec.shape) {
    case SyntheticShape::Chain:
      gt = chain_ground_truth(spec, rng);
      break;
    case SyntheticShape::Ring:
      gt = ring_ground_truth(spec);
      break;
    case SyntheticShape::Grid:
      gt = grid_ground_truth(spec, rng, &extra_edges);
      break;
  }

  // Odometry edges, structural closures, then random skip closures.
  std::vector<std::pair<int, int>> edge_pairs;
  for (int i = 0; i + 1 < spec.n_poses; ++i) edge_pairs.push_back({i, i + 1});
  if (spec.shape == SyntheticShape::Ring) edge_pairs.push_back({spec.n_poses - 1, 0});
  if (spec.shape == SyntheticShape::Grid) {
    for (const auto& e : extra_edges)
      if (rng.uniform01() < spec.loop_closure_prob) edge_pairs.push_back(e);
  } else {
    for (int i = 2; i < spec.n_poses; ++i) {
      if (rng.uniform01() < spec.loop_closure_prob) {
        const int max_skip = std::min(i, 25);
        const int skip = 2 + static_cast<int>(rng.uniform_index(std::max(1, max_skip - 1)));
        if (skip <= i) edge_pairs.push_back({i - skip, i});
      }
    }
  }

  const double sigma_rot = spec.rot_noise_deg * M_PI / 180.0;
  const double sigma_trans = spec.trans_noise_m;
  const double kappa = precision_from_sigma(sigma_rot);
  const double tau = precision_from_sigma(sigma_trans);

  PoseGraph g;
  g.dimension = spec.dimension;
  g.poses = gt;
  for (const auto& [i, j] : edge_pairs) {
    const Pose rel = compose(inverse(gt[i]), gt[j]);
    const Rotation noisy_rot =
        Rotation::unchecked(rel.rotation.matrix() *
                            random_rotation_increment(rng, spec.dimension, sigma_rot).matrix());
    VecD noisy_t = rel.translation;
    for (int k = 0; k < noisy_t.size(); ++k) noisy_t[k] += sigma_trans * rng.normal();
    RelativeMeasurement m;
    m.from = static_cast<PoseId>(i);
    m.to = static_cast<PoseId>(j);
    m.transform = Pose(noisy_rot, noisy_t);
    m.kappa = kappa;
    m.tau = tau;
    g.add_edge(std::move(m));
  }
  g.require_connected();
  return {std::move(g), std::move(gt)};
}

SyntheticSpec parse_synthetic_spec(const std::string& text) {
  SyntheticSpec spec;
  std::string shape, rest = text;
  const auto cut = [&rest]() -> std::string {
    const auto pos = rest.find(':');
    std::string head = rest.substr(0, pos);
    rest = (pos == std::string::npos) ? std::string() : rest.substr(pos + 1);
    return head;
  };
  shape = cut();
  if (shape == "chain")
    spec.shape = SyntheticShape::Chain;
  else if (shape == "ring")
    spec.shape = SyntheticShape::Ring;
  else if (shape == "grid")
    spec.shape = SyntheticShape::Grid;
  else
    throw std::invalid_argument("synthetic spec: unknown shape '" + shape + "'");
  const std::string n_str = cut();
  try {
    spec.n_poses = std::stoi(n_str);
  } catch (const std::exception&) {
    throw std::invalid_argument("synthetic spec: bad pose count '" + n_str + "'");
  }
  if (!rest.empty()) {
    if (rest == "2d")
      spec.dimension = 2;
    else if (rest == "3d")
      spec.dimension = 3;
    else
      throw std::invalid_argument("synthetic spec: bad dimension suffix '" + rest + "'");
  }
  spec.validate();
  return spec;
}

std::string to_string(SyntheticShape shape) {
  switch (shape) {
    case SyntheticShape::Chain: return "chain";
    case SyntheticShape::Ring: return "ring";
    case SyntheticShape::Grid: return "grid";
  }
  return "?";
}

}  // namespace robo
