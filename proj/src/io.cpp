#include "netrecon/io.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "netrecon/errors.hpp"

namespace netrecon {

std::vector<std::string> default_labels(int n) {
  std::vector<std::string> labels;
  labels.reserve(n);
  for (int i = 0; i < n; ++i) labels.push_back(std::to_string(i + 1));
  return labels;
}

namespace {

std::vector<std::string> labels_or_default(const std::vector<std::string>& labels,
                                           int n) {
  if (static_cast<int>(labels.size()) == n) return labels;
  return default_labels(n);
}

}  // namespace

void write_panel_csv(std::ostream& os, const TimeSeriesPanel& panel) {
  const auto labels = labels_or_default(panel.labels, panel.n());
  for (int i = 0; i < panel.n(); ++i) {
    os << (i ? "," : "") << labels[i];
  }
  os << "\n";
  os << std::setprecision(17);
  for (long t = 0; t < panel.length(); ++t) {
    for (int i = 0; i < panel.n(); ++i) {
      os << (i ? "," : "") << panel.samples(t, i);
    }
    os << "\n";
  }
}

TimeSeriesPanel read_panel_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("panel CSV: empty input");
  TimeSeriesPanel panel;
  {
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) panel.labels.push_back(cell);
  }
  const int n = static_cast<int>(panel.labels.size());
  std::vector<double> data;
  long rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    int cols = 0;
    while (std::getline(row, cell, ',')) {
      data.push_back(std::stod(cell));
      ++cols;
    }
    if (cols != n) throw ConfigError("panel CSV: ragged row");
    ++rows;
  }
  if (rows == 0) throw ConfigError("panel CSV: no samples");
  panel.samples.resize(rows, n);
  for (long t = 0; t < rows; ++t) {
    for (int i = 0; i < n; ++i) panel.samples(t, i) = data[t * n + i];
  }
  return panel;
}

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& labels) {
  const int n = static_cast<int>(m.rows());
  const auto names = labels_or_default(labels, n);
  os << "node";
  for (int j = 0; j < n; ++j) os << "," << names[j];
  os << "\n";
  os << std::setprecision(12);
  for (int i = 0; i < n; ++i) {
    os << names[i];
    for (int j = 0; j < n; ++j) os << "," << m(i, j);
    os << "\n";
  }
}

void write_edge_list(std::ostream& os, const UndirectedGraph& g) {
  os << "nodes " << g.n << "\n";
  for (const auto& [i, j] : g.edges) os << "edge " << i << " " << j << "\n";
}

void write_edge_list(std::ostream& os, const DirectedGraph& g) {
  os << "nodes " << g.n << "\n";
  for (const auto& [i, j] : g.arcs) os << "arc " << i << " " << j << "\n";
}

UndirectedGraph read_edge_list(std::istream& is) {
  std::string word;
  UndirectedGraph g;
  bool have_nodes = false;
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::stringstream row(line);
    if (!(row >> word)) continue;
    if (word == "nodes") {
      int n = 0;
      if (!(row >> n)) throw ConfigError("edge list: bad node count");
      g = UndirectedGraph(n);
      have_nodes = true;
    } else if (word == "edge") {
      if (!have_nodes) throw ConfigError("edge list: 'nodes' line must come first");
      int i = 0, j = 0;
      if (!(row >> i >> j)) throw ConfigError("edge list: bad edge line");
      g.add_edge(i, j);
    } else {
      throw ConfigError("edge list: unknown record '" + word + "'");
    }
  }
  if (!have_nodes) throw ConfigError("edge list: missing 'nodes' line");
  return g;
}

std::string to_dot(const DirectedGraph& g,
                   const std::vector<std::string>& labels) {
  const auto names = labels_or_default(labels, g.n);
  std::ostringstream os;
  os << "digraph generative {\n  node [shape=circle];\n";
  for (int i = 0; i < g.n; ++i) os << "  \"" << names[i] << "\";\n";
  for (const auto& [i, j] : g.arcs) {
    os << "  \"" << names[i] << "\" -> \"" << names[j] << "\";\n";
  }
  os << "}\n";
  return os.str();
}

std::string to_dot(const UndirectedGraph& g,
                   const std::vector<std::string>& labels) {
  const auto names = labels_or_default(labels, g.n);
  std::ostringstream os;
  os << "graph recovered {\n  node [shape=circle];\n";
  for (int i = 0; i < g.n; ++i) os << "  \"" << names[i] << "\";\n";
  for (const auto& [i, j] : g.edges) {
    os << "  \"" << names[i] << "\" -- \"" << names[j] << "\";\n";
  }
  os << "}\n";
  return os.str();
}

std::string to_dot_classified(const PredictionReport& report,
                              const std::vector<std::string>& labels) {
  const UndirectedGraph& g =
      report.recovered ? *report.recovered : report.perturbed;
  const auto names = labels_or_default(labels, g.n);
  std::ostringstream os;
  os << "graph prediction {\n  node [shape=circle];\n";
  for (int i = 0; i < g.n; ++i) os << "  \"" << names[i] << "\";\n";
  auto style = [&](const Edge& e) -> const char* {
    const auto it = report.classification.find(e);
    if (it == report.classification.end()) return "";
    switch (it->second) {
      case EdgeClass::kTrueKin:
        return "";
      case EdgeClass::kPredictedSpurious:
        return " [style=dashed, color=red]";
      case EdgeClass::kViolation:
        return " [style=bold, color=red, penwidth=2]";
    }
    return "";
  };
  for (const auto& e : g.edges) {
    os << "  \"" << names[e.first] << "\" -- \"" << names[e.second] << "\""
       << style(e) << ";\n";
  }
  os << "}\n";
  return os.str();
}

std::string spectral_to_json(const SpectralMatrix& s) {
  nlohmann::json j;
  j["freqs"] = s.freqs;
  nlohmann::json values = nlohmann::json::array();
  for (const auto& m : s.values) {
    nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      nlohmann::json re_row = nlohmann::json::array(),
                     im_row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        re_row.push_back(m(r, c).real());
        im_row.push_back(m(r, c).imag());
      }
      re.push_back(re_row);
      im.push_back(im_row);
    }
    values.push_back({{"real", re}, {"imag", im}});
  }
  j["values"] = values;
  return j.dump(2);
}

}  // namespace netrecon
