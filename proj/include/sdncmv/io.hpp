#pragma once

#include "sdncmv/core.hpp"
#include "sdncmv/ensemble.hpp"
#include "sdncmv/evalmetrics.hpp"
#include "sdncmv/synthgen.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sdncmv::io {

/// %.17g rendering; round-trips doubles exactly through text.
std::string format_double(double v);

/// Write-to-temp-then-rename so readers never observe partial files.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_csv(const std::filesystem::path& path);

struct DatasetManifest {
  int format_version = 1;
  int p = 0;
  int q = 0;
  int confounder_count = 0;
  struct SubjectEntry {
    std::string id;
    int label = 0;
    std::string matrix_file;
    std::vector<double> confounders;
  };
  std::vector<SubjectEntry> subjects;
  std::optional<ScenarioConfig> scenario;  // present for synthetic cohorts
};

/// Persist a cohort: manifest.json plus one CSV per subject.
void write_dataset(const std::filesystem::path& dir, const CohortDataset& dataset,
                   const std::optional<ScenarioConfig>& scenario = std::nullopt,
                   const std::string& prefix = "");

struct LoadedDataset {
  CohortDataset cohort;
  DatasetManifest manifest;
};

LoadedDataset read_dataset(const std::filesystem::path& dir,
                           const std::string& manifest_name = "manifest.json");

void write_truth_tsv(const std::filesystem::path& path, const GroundTruth& truth, int p);
std::vector<std::size_t> read_truth_support(const std::filesystem::path& path, int p);

void write_features_tsv(const std::filesystem::path& path, const FeatureDataset& data);
FeatureDataset read_features_tsv(const std::filesystem::path& path);

struct ClimeLogRow {
  std::string id;
  double lambda = 0.0;
  double density = 0.0;
  bool attainable = false;
  std::string status = "ok";
};
void write_clime_log_tsv(const std::filesystem::path& path, const std::vector<ClimeLogRow>& rows);

void write_model_json(const std::filesystem::path& path, const EnsembleModel& model);
EnsembleModel read_model_json(const std::filesystem::path& path);

void write_edges_tsv(const std::filesystem::path& path, const DifferentialNetwork& network);
void write_scree_tsv(const std::filesystem::path& path,
                     const std::vector<std::pair<int, std::size_t>>& scree);
void write_pr_tsv(const std::filesystem::path& path, const std::vector<PrPoint>& curve);
void write_metrics_tsv(const std::filesystem::path& path,
                       const std::vector<std::pair<std::string, double>>& metrics);
void write_predictions_tsv(const std::filesystem::path& path, const EnsembleModel& model);

}  // namespace sdncmv::io
