#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sdncmv/io.hpp"
#include "sdncmv/rng.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace sdncmv;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sdncmv_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Matrix random_matrix(int r, int c, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.normal() * std::pow(10.0, rng.normal());
  return m;
}

}  // namespace

TEST_CASE("matrix CSV round-trips bitwise") {
  const fs::path dir = scratch_dir("matrix");
  const Matrix m = random_matrix(7, 5, 50);
  io::write_matrix_csv(dir / "m.csv", m);
  const Matrix back = io::read_matrix_csv(dir / "m.csv");
  CHECK(back == m);  // exact, including awkward magnitudes

  // write -> read -> write is byte-identical
  io::write_matrix_csv(dir / "m2.csv", back);
  CHECK(slurp(dir / "m.csv") == slurp(dir / "m2.csv"));
}

TEST_CASE("dataset manifest round-trip with confounders and scenario") {
  const fs::path dir = scratch_dir("dataset");
  CohortDataset cohort;
  cohort.subjects.push_back({"a", 1, random_matrix(4, 6, 51)});
  cohort.subjects.push_back({"b", 0, random_matrix(4, 6, 52)});
  Vector c1(2), c2(2);
  c1 << 70.5, 1.0;
  c2 << 65.0, 0.0;
  cohort.confounders = {c1, c2};

  ScenarioConfig scenario;
  scenario.p = 4;
  scenario.q = 6;
  scenario.seed = 99;
  io::write_dataset(dir, cohort, scenario);

  const io::LoadedDataset loaded = io::read_dataset(dir);
  CHECK(loaded.manifest.p == 4);
  CHECK(loaded.manifest.q == 6);
  CHECK(loaded.manifest.confounder_count == 2);
  REQUIRE(loaded.cohort.subjects.size() == 2);
  CHECK(loaded.cohort.subjects[0].id == "a");
  CHECK(loaded.cohort.subjects[0].label == 1);
  CHECK(loaded.cohort.subjects[0].data == cohort.subjects[0].data);
  CHECK(loaded.cohort.confounders[1] == c2);
  REQUIRE(loaded.manifest.scenario.has_value());
  CHECK(loaded.manifest.scenario->seed == 99);
}

TEST_CASE("truth TSV round-trips the support") {
  const fs::path dir = scratch_dir("truth");
  GroundTruth truth;
  truth.omega_x = Matrix::Identity(5, 5);
  truth.omega_y = Matrix::Identity(5, 5);
  truth.omega_x(0, 1) = truth.omega_x(1, 0) = 1.5;
  truth.omega_y(0, 1) = truth.omega_y(1, 0) = -1.5;
  truth.omega_x(2, 4) = truth.omega_x(4, 2) = -1.1;
  truth.omega_y(2, 4) = truth.omega_y(4, 2) = 1.1;
  truth.delta_support = {edge_index(1, 2, 5), edge_index(3, 5, 5)};

  io::write_truth_tsv(dir / "truth.tsv", truth, 5);
  const auto support = io::read_truth_support(dir / "truth.tsv", 5);
  CHECK(support == truth.delta_support);
}

TEST_CASE("features TSV round-trips and is byte-stable") {
  const fs::path dir = scratch_dir("features");
  FeatureDataset data;
  data.p = 4;
  data.ids = {"s1", "s2", "s3"};
  data.labels.resize(3);
  data.labels << 1, 0, 1;
  data.confounders = random_matrix(3, 2, 53);
  data.features = random_matrix(3, 6, 54);

  io::write_features_tsv(dir / "f.tsv", data);
  const FeatureDataset back = io::read_features_tsv(dir / "f.tsv");
  CHECK(back.p == 4);
  CHECK(back.ids == data.ids);
  CHECK(back.labels == data.labels);
  CHECK(back.confounders == data.confounders);
  CHECK(back.features == data.features);

  io::write_features_tsv(dir / "f2.tsv", back);
  CHECK(slurp(dir / "f.tsv") == slurp(dir / "f2.tsv"));

  SUBCASE("header names the edges in canonical order") {
    std::istringstream ss(slurp(dir / "f.tsv"));
    std::string header;
    std::getline(ss, header);
    CHECK(header ==
          "subject\tlabel\tq_1\tq_2\tw_1_2\tw_1_3\tw_2_3\tw_1_4\tw_2_4\tw_3_4");
  }
}

TEST_CASE("model JSON round-trips ensemble state") {
  const fs::path dir = scratch_dir("model");
  EnsembleModel model;
  model.bootstrap_count = 3;
  model.seed = 1234;
  model.p = 4;
  model.active_set = {0, 2, 5};
  model.theta_counts = {2, 0, 1, 0, 0, 3};
  model.test_ids = {"t1", "t2"};
  model.test_labels.resize(2);
  model.test_labels << 1, 0;
  model.votes = {3, 1};
  model.replicate_predictions = {{1, 0}, {1, 1}, {1, 0}};
  for (int b = 0; b < 3; ++b) {
    PlrModel m;
    m.lambda = 0.1 * (b + 1);
    m.alpha = 0.5;
    m.intercept = -0.2;
    m.eta = Vector::Zero(0);
    m.beta = Vector::Zero(2);
    m.beta(0) = 0.7;
    m.feature_index = {0, 5};
    model.models.push_back(m);
  }

  io::write_model_json(dir / "model.json", model);
  const EnsembleModel back = io::read_model_json(dir / "model.json");
  CHECK(back.bootstrap_count == 3);
  CHECK(back.seed == 1234);
  CHECK(back.p == 4);
  CHECK(back.active_set == model.active_set);
  CHECK(back.theta_counts == model.theta_counts);
  CHECK(back.votes == model.votes);
  CHECK(back.replicate_predictions == model.replicate_predictions);
  CHECK(back.test_ids == model.test_ids);
  REQUIRE(back.models.size() == 3);
  CHECK(back.models[1].lambda == doctest::Approx(0.2));
  // persisted supports keep only nonzero coefficients
  REQUIRE(back.models[0].feature_index.size() == 1);
  CHECK(back.models[0].feature_index[0] == 0);
  CHECK(back.models[0].beta(0) == doctest::Approx(0.7));
}

TEST_CASE("report writers produce headers and rows") {
  const fs::path dir = scratch_dir("reports");
  DifferentialNetwork net;
  net.tau = 2;
  net.edges = {{1, 2, 5}, {2, 3, 3}};
  io::write_edges_tsv(dir / "edges.tsv", net);
  CHECK(slurp(dir / "edges.tsv") == "i\tj\tcount\n1\t2\t5\n2\t3\t3\n");

  io::write_scree_tsv(dir / "scree.tsv", {{0, 4}, {1, 2}, {2, 0}});
  CHECK(slurp(dir / "scree.tsv") == "tau\tedges\n0\t4\n1\t2\n2\t0\n");

  io::write_metrics_tsv(dir / "metrics.tsv", {{"tpr", 0.5}});
  CHECK(slurp(dir / "metrics.tsv") == "metric\tvalue\ntpr\t0.5\n");

  io::write_pr_tsv(dir / "pr.tsv", {{1, 0.5, 1.0}});
  CHECK(slurp(dir / "pr.tsv") == "tau\trecall\tprecision\n1\t0.5\t1\n");
}
