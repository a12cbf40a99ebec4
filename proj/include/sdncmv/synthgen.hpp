#pragma once

#include "sdncmv/core.hpp"
#include "sdncmv/rng.hpp"

#include <cstdint>
#include <vector>

namespace sdncmv {

enum class GraphKind { hub, small_world };
enum class TemporalKind { ar, band };

/// Undirected spatial graph over p regions, partitioned into blocks.
/// Edges never cross block boundaries.
struct SpatialGraph {
  int p = 0;
  GraphKind kind = GraphKind::hub;
  Eigen::MatrixXi adjacency;              // symmetric 0/1, zero diagonal
  std::vector<std::vector<int>> blocks;   // 0-based node partition

  std::size_t edge_count() const;
};

/// Base precision matrices for the two groups plus the differential
/// support they induce.
struct GroundTruth {
  Matrix omega_x;  // case group, after the PD shift
  Matrix omega_y;  // control group, after the PD shift
  std::vector<std::size_t> delta_support;  // flat edge indices, ascending

  Matrix delta() const { return omega_x - omega_y; }
};

struct ScenarioConfig {
  int scenario = 1;  // 1..4 per the simulation design
  int p = 100;
  int q = 50;
  int n1 = 30;
  int n2 = 30;
  int n1_test = -1;  // -1 mirrors n1
  int n2_test = -1;  // -1 mirrors n2
  int hub_blocks = 5;
  int small_world_subgraphs = 10;
  double rewire_prob = 0.05;
  double ar_param_case = 0.4;
  double ar_param_control = 0.5;
  int bc_bandwidth_case = 4;
  int bc_bandwidth_control = 6;
  double fill_magnitude_low = 1.0;   // off-diagonal magnitudes drawn from
  double fill_magnitude_high = 2.0;  // [low, high] with random sign
  int flipped_blocks = 2;
  double pd_offset = 0.5;
  double perturb_var = 0.02;
  std::uint64_t seed = 0;

  int effective_n1_test() const { return n1_test < 0 ? n1 : n1_test; }
  int effective_n2_test() const { return n2_test < 0 ? n2 : n2_test; }
  GraphKind graph_kind() const {
    return (scenario == 1 || scenario == 3) ? GraphKind::hub : GraphKind::small_world;
  }
  TemporalKind temporal_kind() const {
    return (scenario == 1 || scenario == 2) ? TemporalKind::ar : TemporalKind::band;
  }
  void validate() const;
};

/// p nodes split into n_blocks groups (remainder goes to the final
/// block); within each group one randomly chosen hub connects to every
/// other member. No cross-group edges.
SpatialGraph gen_hub_graph(int p, int n_blocks, Rng& rng);

/// p nodes split into n_subgraphs blocks, each a ring rewired
/// Watts-Strogatz style with the given per-edge probability. Rewired
/// endpoints stay inside the block and the edge count is preserved.
SpatialGraph gen_small_world_graph(int p, int n_subgraphs, double rewire_prob, Rng& rng);

/// Base precision pair: omega_x has the graph's support with off-diagonal
/// magnitudes in [1,2] and random signs; omega_y flips the sign of every
/// off-diagonal entry in two randomly chosen blocks. Both matrices then
/// receive the shift omega += (|lambda_min| + pd_offset) I.
std::pair<std::pair<Matrix, Matrix>, GroundTruth>
gen_base_precisions(const SpatialGraph& graph, Rng& rng, double fill_low = 1.0,
                    double fill_high = 2.0, int flipped_blocks = 2, double pd_offset = 0.5);

/// base + Psi where Psi is symmetric, supported on base's off-diagonal
/// support, with N(0, perturb_var) entries. Re-shifted when the result's
/// smallest eigenvalue drops to 1e-3 or below.
Matrix gen_individual_precision(const Matrix& base, double perturb_var, Rng& rng,
                                double pd_offset = 0.5);

/// AR: entry (i,j) = param^|i-j|, param in (0,1).
/// Band: entry (i,j) = 1/(|i-j|+1) for |i-j| <= bandwidth, else 0.
Matrix gen_temporal_cov(TemporalKind kind, int q, double param);

/// Draw one p x q matrix-normal sample with mean zero and covariance
/// sigma_t (x) sigma_s: A Z B' with A A' = sigma_s, B B' = sigma_t.
Matrix sample_matrix_normal(const Matrix& sigma_t, const Matrix& sigma_s, Rng& rng);

struct ScenarioData {
  CohortDataset train;
  CohortDataset test;
  GroundTruth truth;
};

/// Full scenario draw: graphs and base precisions built once, then
/// independently seeded per-subject samples. Pure function of the config.
ScenarioData gen_scenario(const ScenarioConfig& config, int jobs = 1);

}  // namespace sdncmv
