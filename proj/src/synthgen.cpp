#include "sdncmv/synthgen.hpp"

#include "sdncmv/parallel.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <set>

namespace sdncmv {
namespace {

// Even split with the remainder folded into the final block.
std::vector<std::vector<int>> split_blocks(int p, int n_blocks, int min_size) {
  if (n_blocks < 1) throw std::domain_error("block count must be >= 1");
  if (n_blocks > p) throw std::domain_error("more blocks than nodes");
  const int base = p / n_blocks;
  if (base < min_size)
    throw std::domain_error("blocks would have fewer than " + std::to_string(min_size) + " nodes");
  std::vector<std::vector<int>> blocks(static_cast<std::size_t>(n_blocks));
  int node = 0;
  for (int b = 0; b < n_blocks; ++b) {
    const int size = (b == n_blocks - 1) ? p - node : base;
    for (int k = 0; k < size; ++k) blocks[static_cast<std::size_t>(b)].push_back(node++);
  }
  return blocks;
}

void add_edge(Eigen::MatrixXi& adj, int u, int v) {
  adj(u, v) = 1;
  adj(v, u) = 1;
}

double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

std::size_t SpatialGraph::edge_count() const {
  std::size_t c = 0;
  for (int j = 1; j < p; ++j)
    for (int i = 0; i < j; ++i) c += (adjacency(i, j) != 0);
  return c;
}

void ScenarioConfig::validate() const {
  if (scenario < 1 || scenario > 4) throw std::domain_error("scenario must be 1..4");
  if (p < 2 || q < 3) throw std::domain_error("need p >= 2 and q >= 3");
  if (n1 < 1 || n2 < 1) throw std::domain_error("group sizes must be positive");
  if (rewire_prob < 0.0 || rewire_prob > 1.0)
    throw std::domain_error("rewire probability must lie in [0,1]");
  if (ar_param_case <= 0.0 || ar_param_case >= 1.0 || ar_param_control <= 0.0 ||
      ar_param_control >= 1.0)
    throw std::domain_error("AR parameters must lie in (0,1)");
  if (bc_bandwidth_case < 0 || bc_bandwidth_control < 0)
    throw std::domain_error("band widths must be non-negative");
  if (perturb_var < 0.0) throw std::domain_error("perturbation variance must be >= 0");
  if (flipped_blocks < 1) throw std::domain_error("flipped block count must be >= 1");
}

SpatialGraph gen_hub_graph(int p, int n_blocks, Rng& rng) {
  SpatialGraph g;
  g.p = p;
  g.kind = GraphKind::hub;
  g.blocks = split_blocks(p, n_blocks, 1);
  g.adjacency = Eigen::MatrixXi::Zero(p, p);
  for (const auto& block : g.blocks) {
    const auto hub_pos = static_cast<std::size_t>(rng.uniform_int(block.size()));
    const int hub = block[hub_pos];
    for (int node : block)
      if (node != hub) add_edge(g.adjacency, hub, node);
  }
  return g;
}

SpatialGraph gen_small_world_graph(int p, int n_subgraphs, double rewire_prob, Rng& rng) {
  if (rewire_prob < 0.0 || rewire_prob > 1.0)
    throw std::domain_error("rewire probability must lie in [0,1]");
  SpatialGraph g;
  g.p = p;
  g.kind = GraphKind::small_world;
  g.blocks = split_blocks(p, n_subgraphs, 3);
  g.adjacency = Eigen::MatrixXi::Zero(p, p);
  for (const auto& block : g.blocks) {
    const int size = static_cast<int>(block.size());
    // ring with neighbor radius 1
    for (int k = 0; k < size; ++k)
      add_edge(g.adjacency, block[static_cast<std::size_t>(k)],
               block[static_cast<std::size_t>((k + 1) % size)]);
    // per-edge rewiring, endpoints kept inside the block
    for (int k = 0; k < size; ++k) {
      const int u = block[static_cast<std::size_t>(k)];
      const int v = block[static_cast<std::size_t>((k + 1) % size)];
      if (rng.uniform() >= rewire_prob) continue;
      if (!g.adjacency(u, v)) continue;  // already rewired away by an earlier step
      const int max_attempts = 8 * size;
      for (int attempt = 0; attempt < max_attempts; ++attempt) {
        const int w = block[static_cast<std::size_t>(rng.uniform_int(block.size()))];
        if (w == u || g.adjacency(u, w)) continue;
        g.adjacency(u, v) = g.adjacency(v, u) = 0;
        add_edge(g.adjacency, u, w);
        break;
      }
    }
  }
  return g;
}

std::pair<std::pair<Matrix, Matrix>, GroundTruth>
gen_base_precisions(const SpatialGraph& graph, Rng& rng, double fill_low, double fill_high,
                    int flipped_blocks, double pd_offset) {
  const int p = graph.p;

  std::vector<std::size_t> eligible;  // blocks holding at least one edge
  for (std::size_t b = 0; b < graph.blocks.size(); ++b) {
    const auto& block = graph.blocks[b];
    bool has_edge = false;
    for (std::size_t a = 0; a < block.size() && !has_edge; ++a)
      for (std::size_t c = a + 1; c < block.size() && !has_edge; ++c)
        has_edge = graph.adjacency(block[a], block[c]) != 0;
    if (has_edge) eligible.push_back(b);
  }
  if (static_cast<int>(eligible.size()) < flipped_blocks)
    throw std::domain_error("need at least " + std::to_string(flipped_blocks) +
                            " blocks with edges to flip");

  Matrix omega_x = Matrix::Zero(p, p);
  for (int j = 1; j < p; ++j) {
    for (int i = 0; i < j; ++i) {
      if (!graph.adjacency(i, j)) continue;
      const double magnitude = fill_low + (fill_high - fill_low) * rng.uniform();
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      omega_x(i, j) = omega_x(j, i) = sign * magnitude;
    }
  }

  // pick the blocks whose off-diagonal signs flip in the control group
  std::vector<std::size_t> flipped;
  while (static_cast<int>(flipped.size()) < flipped_blocks) {
    const std::size_t pick = eligible[static_cast<std::size_t>(rng.uniform_int(eligible.size()))];
    if (std::find(flipped.begin(), flipped.end(), pick) == flipped.end()) flipped.push_back(pick);
  }

  Matrix omega_y = omega_x;
  GroundTruth truth;
  for (std::size_t b : flipped) {
    const auto& block = graph.blocks[b];
    for (std::size_t a = 0; a < block.size(); ++a) {
      for (std::size_t c = a + 1; c < block.size(); ++c) {
        const int i = std::min(block[a], block[c]);
        const int j = std::max(block[a], block[c]);
        if (omega_y(i, j) == 0.0) continue;
        omega_y(i, j) = -omega_y(i, j);
        omega_y(j, i) = -omega_y(j, i);
        truth.delta_support.push_back(edge_index(i + 1, j + 1, p));
      }
    }
  }
  std::sort(truth.delta_support.begin(), truth.delta_support.end());

  omega_x += (std::abs(min_eigenvalue(omega_x)) + pd_offset) * Matrix::Identity(p, p);
  omega_y += (std::abs(min_eigenvalue(omega_y)) + pd_offset) * Matrix::Identity(p, p);
  truth.omega_x = omega_x;
  truth.omega_y = omega_y;
  return {{omega_x, omega_y}, truth};
}

Matrix gen_individual_precision(const Matrix& base, double perturb_var, Rng& rng,
                                double pd_offset) {
  const auto p = base.rows();
  const double sd = std::sqrt(perturb_var);
  Matrix result = base;
  for (Eigen::Index j = 1; j < p; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      if (base(i, j) == 0.0) continue;
      const double psi = rng.normal(0.0, sd);
      result(i, j) += psi;
      result(j, i) += psi;
    }
  }
  const double lmin = min_eigenvalue(result);
  if (lmin <= 1e-3)
    result += (std::abs(lmin) + pd_offset) * Matrix::Identity(p, p);
  return result;
}

Matrix gen_temporal_cov(TemporalKind kind, int q, double param) {
  if (q < 1) throw std::domain_error("temporal dimension must be >= 1");
  Matrix sigma = Matrix::Identity(q, q);
  if (kind == TemporalKind::ar) {
    if (param <= 0.0 || param >= 1.0) throw std::domain_error("AR parameter must lie in (0,1)");
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j) sigma(i, j) = std::pow(param, std::abs(i - j));
  } else {
    if (param < 0.0) throw std::domain_error("band width must be >= 0");
    const int bandwidth = static_cast<int>(param);
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j) {
        const int d = std::abs(i - j);
        sigma(i, j) = d <= bandwidth ? 1.0 / (d + 1.0) : 0.0;
      }
  }
  return sigma;
}

Matrix sample_matrix_normal(const Matrix& sigma_t, const Matrix& sigma_s, Rng& rng) {
  Eigen::LLT<Matrix> llt_s(sigma_s);
  if (llt_s.info() != Eigen::Success)
    throw std::runtime_error("spatial covariance is not positive definite");
  Eigen::LLT<Matrix> llt_t(sigma_t);
  if (llt_t.info() != Eigen::Success)
    throw std::runtime_error("temporal covariance is not positive definite");

  const auto p = sigma_s.rows();
  const auto q = sigma_t.rows();
  Matrix z(p, q);
  for (Eigen::Index j = 0; j < q; ++j)
    for (Eigen::Index i = 0; i < p; ++i) z(i, j) = rng.normal();
  return llt_s.matrixL() * z * llt_t.matrixL().transpose();
}

ScenarioData gen_scenario(const ScenarioConfig& config, int jobs) {
  config.validate();

  Rng graph_rng = Rng::stream(config.seed, rng_domain::graph, 0);
  const SpatialGraph graph =
      config.graph_kind() == GraphKind::hub
          ? gen_hub_graph(config.p, config.hub_blocks, graph_rng)
          : gen_small_world_graph(config.p, config.small_world_subgraphs, config.rewire_prob,
                                  graph_rng);

  Rng base_rng = Rng::stream(config.seed, rng_domain::base_precision, 0);
  auto [bases, truth] =
      gen_base_precisions(graph, base_rng, config.fill_magnitude_low, config.fill_magnitude_high,
                          config.flipped_blocks, config.pd_offset);
  const Matrix& omega_x = bases.first;
  const Matrix& omega_y = bases.second;

  Matrix sigma_t_case, sigma_t_control;
  if (config.temporal_kind() == TemporalKind::ar) {
    sigma_t_case = gen_temporal_cov(TemporalKind::ar, config.q, config.ar_param_case);
    sigma_t_control = gen_temporal_cov(TemporalKind::ar, config.q, config.ar_param_control);
  } else {
    sigma_t_case = gen_temporal_cov(TemporalKind::band, config.q, config.bc_bandwidth_case);
    sigma_t_control = gen_temporal_cov(TemporalKind::band, config.q, config.bc_bandwidth_control);
  }

  struct Slot {
    int label;
    bool test;
    std::string id;
  };
  std::vector<Slot> slots;
  auto tag = [](const char* prefix, int k) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%03d", prefix, k);
    return std::string(buf);
  };
  for (int k = 0; k < config.n1; ++k) slots.push_back({1, false, tag("case_", k)});
  for (int k = 0; k < config.n2; ++k) slots.push_back({0, false, tag("ctrl_", k)});
  for (int k = 0; k < config.effective_n1_test(); ++k)
    slots.push_back({1, true, tag("test_case_", k)});
  for (int k = 0; k < config.effective_n2_test(); ++k)
    slots.push_back({0, true, tag("test_ctrl_", k)});

  std::vector<SubjectMatrix> drawn(slots.size());
  parallel_for(slots.size(), jobs, [&](std::size_t idx) {
    const Slot& slot = slots[idx];
    Rng rng = Rng::stream(config.seed, rng_domain::subject, idx);
    const Matrix& base = slot.label == 1 ? omega_x : omega_y;
    const Matrix omega = gen_individual_precision(base, config.perturb_var, rng, config.pd_offset);
    const Matrix sigma_s = Eigen::LLT<Matrix>(omega).solve(Matrix::Identity(config.p, config.p));
    const Matrix& sigma_t = slot.label == 1 ? sigma_t_case : sigma_t_control;
    drawn[idx] = SubjectMatrix{slot.id, slot.label, sample_matrix_normal(sigma_t, sigma_s, rng)};
  });

  ScenarioData out;
  out.truth = std::move(truth);
  for (std::size_t i = 0; i < slots.size(); ++i) {
    (slots[i].test ? out.test : out.train).subjects.push_back(std::move(drawn[i]));
  }
  out.train.validate();
  if (!out.test.subjects.empty()) out.test.validate();
  return out;
}

}  // namespace sdncmv
