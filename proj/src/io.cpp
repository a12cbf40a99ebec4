#include "sdncmv/io.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sdncmv::io {
namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(const std::string& tok, const std::filesystem::path& path) {
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc())
    throw std::runtime_error("bad numeric field '" + tok + "' in " + path.string());
  return v;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::vector<std::string> lines;
  std::istringstream ss(read_file(path));
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

json scenario_to_json(const ScenarioConfig& c) {
  return json{{"scenario", c.scenario},
              {"p", c.p},
              {"q", c.q},
              {"n1", c.n1},
              {"n2", c.n2},
              {"n1_test", c.effective_n1_test()},
              {"n2_test", c.effective_n2_test()},
              {"hub_blocks", c.hub_blocks},
              {"small_world_subgraphs", c.small_world_subgraphs},
              {"rewire_prob", c.rewire_prob},
              {"ar_param_case", c.ar_param_case},
              {"ar_param_control", c.ar_param_control},
              {"bc_bandwidth_case", c.bc_bandwidth_case},
              {"bc_bandwidth_control", c.bc_bandwidth_control},
              {"flipped_blocks", c.flipped_blocks},
              {"pd_offset", c.pd_offset},
              {"perturb_var", c.perturb_var},
              {"seed", c.seed}};
}

ScenarioConfig scenario_from_json(const json& j) {
  ScenarioConfig c;
  c.scenario = j.at("scenario").get<int>();
  c.p = j.at("p").get<int>();
  c.q = j.at("q").get<int>();
  c.n1 = j.at("n1").get<int>();
  c.n2 = j.at("n2").get<int>();
  c.n1_test = j.value("n1_test", -1);
  c.n2_test = j.value("n2_test", -1);
  c.hub_blocks = j.value("hub_blocks", 5);
  c.small_world_subgraphs = j.value("small_world_subgraphs", 10);
  c.rewire_prob = j.value("rewire_prob", 0.05);
  c.ar_param_case = j.value("ar_param_case", 0.4);
  c.ar_param_control = j.value("ar_param_control", 0.5);
  c.bc_bandwidth_case = j.value("bc_bandwidth_case", 4);
  c.bc_bandwidth_control = j.value("bc_bandwidth_control", 6);
  c.flipped_blocks = j.value("flipped_blocks", 2);
  c.pd_offset = j.value("pd_offset", 0.5);
  c.perturb_var = j.value("perturb_var", 0.02);
  c.seed = j.value("seed", std::uint64_t{0});
  return c;
}

}  // namespace

std::string format_double(double v) {
  // shortest representation that parses back to the same double,
  // independent of the process locale
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  std::string out;
  out.reserve(static_cast<std::size_t>(m.size()) * 20);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  write_text_atomic(path, out);
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw std::runtime_error("empty matrix file " + path.string());
  const auto rows = static_cast<Eigen::Index>(lines.size());
  const auto first = split(lines[0], ',');
  const auto cols = static_cast<Eigen::Index>(first.size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto fields = split(lines[static_cast<std::size_t>(i)], ',');
    if (static_cast<Eigen::Index>(fields.size()) != cols)
      throw std::runtime_error("ragged matrix row in " + path.string());
    for (Eigen::Index j = 0; j < cols; ++j)
      m(i, j) = parse_double(fields[static_cast<std::size_t>(j)], path);
  }
  return m;
}

void write_dataset(const std::filesystem::path& dir, const CohortDataset& dataset,
                   const std::optional<ScenarioConfig>& scenario, const std::string& prefix) {
  dataset.validate();
  std::filesystem::create_directories(dir);

  json manifest;
  manifest["format_version"] = 1;
  manifest["p"] = dataset.p();
  manifest["q"] = dataset.q();
  manifest["confounder_count"] = dataset.n_confounders();
  json subjects = json::array();
  for (std::size_t k = 0; k < dataset.subjects.size(); ++k) {
    const auto& s = dataset.subjects[k];
    const std::string file = s.id + ".csv";
    write_matrix_csv(dir / file, s.data);
    json entry{{"id", s.id}, {"label", s.label}, {"matrix", file}};
    json conf = json::array();
    if (!dataset.confounders.empty())
      for (Eigen::Index m = 0; m < dataset.confounders[k].size(); ++m)
        conf.push_back(dataset.confounders[k](m));
    entry["confounders"] = conf;
    subjects.push_back(entry);
  }
  manifest["subjects"] = subjects;
  if (scenario) manifest["scenario"] = scenario_to_json(*scenario);

  const std::string name = prefix.empty() ? "manifest.json" : prefix + "_manifest.json";
  write_text_atomic(dir / name, manifest.dump(2) + "\n");
}

LoadedDataset read_dataset(const std::filesystem::path& dir, const std::string& manifest_name) {
  const json j = json::parse(read_file(dir / manifest_name));
  LoadedDataset out;
  out.manifest.format_version = j.at("format_version").get<int>();
  if (out.manifest.format_version != 1)
    throw std::runtime_error("unsupported manifest format version");
  out.manifest.p = j.at("p").get<int>();
  out.manifest.q = j.at("q").get<int>();
  out.manifest.confounder_count = j.at("confounder_count").get<int>();
  if (j.contains("scenario")) out.manifest.scenario = scenario_from_json(j["scenario"]);

  for (const auto& entry : j.at("subjects")) {
    DatasetManifest::SubjectEntry se;
    se.id = entry.at("id").get<std::string>();
    se.label = entry.at("label").get<int>();
    se.matrix_file = entry.at("matrix").get<std::string>();
    se.confounders = entry.value("confounders", std::vector<double>{});
    if (se.label != 0 && se.label != 1)
      throw std::runtime_error("manifest label for " + se.id + " must be 0 or 1");
    out.manifest.subjects.push_back(se);

    SubjectMatrix s;
    s.id = se.id;
    s.label = se.label;
    s.data = read_matrix_csv(dir / se.matrix_file);
    if (s.p() != out.manifest.p || s.q() != out.manifest.q)
      throw std::runtime_error("matrix for " + se.id + " does not match manifest (p,q)");
    out.cohort.subjects.push_back(std::move(s));

    if (static_cast<int>(se.confounders.size()) != out.manifest.confounder_count)
      throw std::runtime_error("confounder length mismatch for " + se.id);
    if (out.manifest.confounder_count > 0) {
      Vector c(out.manifest.confounder_count);
      for (int m = 0; m < out.manifest.confounder_count; ++m)
        c(m) = se.confounders[static_cast<std::size_t>(m)];
      out.cohort.confounders.push_back(std::move(c));
    }
  }
  out.cohort.validate();
  return out;
}

void write_truth_tsv(const std::filesystem::path& path, const GroundTruth& truth, int p) {
  const Matrix delta = truth.delta();
  std::string out = "i\tj\tdelta\n";
  for (std::size_t k : truth.delta_support) {
    const auto [i, j] = edge_from_index(k, p);
    out += std::to_string(i) + '\t' + std::to_string(j) + '\t' +
           format_double(delta(i - 1, j - 1)) + '\n';
  }
  write_text_atomic(path, out);
}

std::vector<std::size_t> read_truth_support(const std::filesystem::path& path, int p) {
  const auto lines = read_lines(path);
  std::vector<std::size_t> support;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto fields = split(lines[li], '\t');
    if (fields.size() < 2) throw std::runtime_error("bad truth row in " + path.string());
    const int i = std::stoi(fields[0]);
    const int j = std::stoi(fields[1]);
    support.push_back(edge_index(i, j, p));
  }
  std::sort(support.begin(), support.end());
  return support;
}

void write_features_tsv(const std::filesystem::path& path, const FeatureDataset& data) {
  data.validate();
  const EdgeIndexMap map(data.p);
  std::string out = "subject\tlabel";
  for (Eigen::Index m = 0; m < data.confounders.cols(); ++m)
    out += "\tq_" + std::to_string(m + 1);
  for (const auto& [i, j] : map.pairs())
    out += "\tw_" + std::to_string(i) + '_' + std::to_string(j);
  out += '\n';
  for (Eigen::Index k = 0; k < data.n(); ++k) {
    out += data.ids[static_cast<std::size_t>(k)] + '\t' + std::to_string(data.labels(k));
    for (Eigen::Index m = 0; m < data.confounders.cols(); ++m)
      out += '\t' + format_double(data.confounders(k, m));
    for (Eigen::Index e = 0; e < data.features.cols(); ++e)
      out += '\t' + format_double(data.features(k, e));
    out += '\n';
  }
  write_text_atomic(path, out);
}

FeatureDataset read_features_tsv(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.size() < 2) throw std::runtime_error("features file has no data rows");
  const auto header = split(lines[0], '\t');
  if (header.size() < 3 || header[0] != "subject" || header[1] != "label")
    throw std::runtime_error("unexpected features header in " + path.string());

  std::size_t m_count = 0;
  std::size_t col = 2;
  while (col < header.size() && header[col].rfind("q_", 0) == 0) {
    ++m_count;
    ++col;
  }
  const std::size_t edge_cols = header.size() - col;
  // p from p(p-1)/2 = edge_cols
  int p = static_cast<int>((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(edge_cols))) / 2.0);
  while (edge_count(p) > edge_cols) --p;
  while (edge_count(p) < edge_cols) ++p;
  if (p < 2 || edge_count(p) != edge_cols)
    throw std::runtime_error("feature columns do not form a p(p-1)/2 edge set");

  FeatureDataset data;
  data.p = p;
  const auto n = static_cast<Eigen::Index>(lines.size() - 1);
  data.labels.resize(n);
  data.confounders.resize(n, static_cast<Eigen::Index>(m_count));
  data.features.resize(n, static_cast<Eigen::Index>(edge_cols));
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto fields = split(lines[static_cast<std::size_t>(k) + 1], '\t');
    if (fields.size() != header.size())
      throw std::runtime_error("ragged features row in " + path.string());
    data.ids.push_back(fields[0]);
    data.labels(k) = std::stoi(fields[1]);
    for (std::size_t m = 0; m < m_count; ++m)
      data.confounders(k, static_cast<Eigen::Index>(m)) = parse_double(fields[2 + m], path);
    for (std::size_t e = 0; e < edge_cols; ++e)
      data.features(k, static_cast<Eigen::Index>(e)) = parse_double(fields[col + e], path);
  }
  data.validate();
  return data;
}

void write_clime_log_tsv(const std::filesystem::path& path,
                         const std::vector<ClimeLogRow>& rows) {
  std::string out = "subject\tlambda\tdensity\tattainable\tstatus\n";
  for (const auto& r : rows)
    out += r.id + '\t' + format_double(r.lambda) + '\t' + format_double(r.density) + '\t' +
           (r.attainable ? "1" : "0") + '\t' + r.status + '\n';
  write_text_atomic(path, out);
}

void write_model_json(const std::filesystem::path& path, const EnsembleModel& model) {
  json j;
  j["format_version"] = 1;
  j["B"] = model.bootstrap_count;
  j["seed"] = model.seed;
  j["p"] = model.p;
  j["active_set"] = model.active_set;
  j["theta_counts"] = model.theta_counts;

  json reps = json::array();
  for (const auto& m : model.models) {
    json r;
    r["lambda"] = m.lambda;
    r["alpha"] = m.alpha;
    r["intercept"] = m.intercept;
    json support = json::array();
    json values = json::array();
    for (std::size_t pos : m.support()) {
      support.push_back(m.feature_index[pos]);
      values.push_back(m.beta(static_cast<Eigen::Index>(pos)));
    }
    r["support"] = support;
    r["coefficients"] = values;
    json eta = json::array();
    for (Eigen::Index e = 0; e < m.eta.size(); ++e) eta.push_back(m.eta(e));
    r["eta"] = eta;
    reps.push_back(r);
  }
  j["replicates"] = reps;

  json test;
  test["ids"] = model.test_ids;
  std::vector<int> labels(model.test_labels.data(),
                          model.test_labels.data() + model.test_labels.size());
  test["labels"] = labels;
  test["votes"] = model.votes;
  test["predictions"] = model.replicate_predictions;
  j["test"] = test;

  write_text_atomic(path, j.dump() + "\n");
}

EnsembleModel read_model_json(const std::filesystem::path& path) {
  const json j = json::parse(read_file(path));
  EnsembleModel model;
  model.bootstrap_count = j.at("B").get<int>();
  model.seed = j.at("seed").get<std::uint64_t>();
  model.p = j.at("p").get<int>();
  model.active_set = j.at("active_set").get<std::vector<std::size_t>>();
  model.theta_counts = j.at("theta_counts").get<std::vector<int>>();
  for (const auto& r : j.at("replicates")) {
    PlrModel m;
    m.lambda = r.at("lambda").get<double>();
    m.alpha = r.at("alpha").get<double>();
    m.intercept = r.at("intercept").get<double>();
    m.feature_index = r.at("support").get<std::vector<std::size_t>>();
    const auto values = r.at("coefficients").get<std::vector<double>>();
    m.beta.resize(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i)
      m.beta(static_cast<Eigen::Index>(i)) = values[i];
    const auto eta = r.at("eta").get<std::vector<double>>();
    m.eta.resize(static_cast<Eigen::Index>(eta.size()));
    for (std::size_t i = 0; i < eta.size(); ++i) m.eta(static_cast<Eigen::Index>(i)) = eta[i];
    model.models.push_back(std::move(m));
  }
  const auto& test = j.at("test");
  model.test_ids = test.at("ids").get<std::vector<std::string>>();
  const auto labels = test.at("labels").get<std::vector<int>>();
  model.test_labels.resize(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i)
    model.test_labels(static_cast<Eigen::Index>(i)) = labels[i];
  model.votes = test.at("votes").get<std::vector<int>>();
  model.replicate_predictions = test.at("predictions").get<std::vector<std::vector<int>>>();
  return model;
}

void write_edges_tsv(const std::filesystem::path& path, const DifferentialNetwork& network) {
  std::string out = "i\tj\tcount\n";
  for (const auto& e : network.edges)
    out += std::to_string(e.i) + '\t' + std::to_string(e.j) + '\t' + std::to_string(e.count) + '\n';
  write_text_atomic(path, out);
}

void write_scree_tsv(const std::filesystem::path& path,
                     const std::vector<std::pair<int, std::size_t>>& scree) {
  std::string out = "tau\tedges\n";
  for (const auto& [tau, count] : scree)
    out += std::to_string(tau) + '\t' + std::to_string(count) + '\n';
  write_text_atomic(path, out);
}

void write_pr_tsv(const std::filesystem::path& path, const std::vector<PrPoint>& curve) {
  std::string out = "tau\trecall\tprecision\n";
  for (const auto& pt : curve)
    out += std::to_string(pt.tau) + '\t' + format_double(pt.recall) + '\t' +
           format_double(pt.precision) + '\n';
  write_text_atomic(path, out);
}

void write_metrics_tsv(const std::filesystem::path& path,
                       const std::vector<std::pair<std::string, double>>& metrics) {
  std::string out = "metric\tvalue\n";
  for (const auto& [name, value] : metrics) out += name + '\t' + format_double(value) + '\n';
  write_text_atomic(path, out);
}

void write_predictions_tsv(const std::filesystem::path& path, const EnsembleModel& model) {
  std::string out = "subject\tlabel\tvotes\tprediction\n";
  for (std::size_t k = 0; k < model.test_ids.size(); ++k) {
    const int pred = 2 * model.votes[k] > model.bootstrap_count ? 1 : 0;
    out += model.test_ids[k] + '\t' + std::to_string(model.test_labels(static_cast<Eigen::Index>(k))) +
           '\t' + std::to_string(model.votes[k]) + '\t' + std::to_string(pred) + '\n';
  }
  write_text_atomic(path, out);
}

}  // namespace sdncmv::io
