#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "netrecon/dim_system.hpp"
#include "netrecon/graphs.hpp"
#include "netrecon/predict.hpp"
#include "netrecon/spectral_matrix.hpp"

namespace netrecon {

/// One column per node with a header row of node labels.
void write_panel_csv(std::ostream& os, const TimeSeriesPanel& panel);
TimeSeriesPanel read_panel_csv(std::istream& is);

/// Square matrix with a label header row/column.
void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& labels);

/// Edge-list text format:
///   nodes N
///   edge I J    (undirected)  /  arc I J    (directed)
/// Indices are 0-based; '#' starts a comment.
void write_edge_list(std::ostream& os, const UndirectedGraph& g);
void write_edge_list(std::ostream& os, const DirectedGraph& g);
UndirectedGraph read_edge_list(std::istream& is);

std::string to_dot(const DirectedGraph& g,
                   const std::vector<std::string>& labels = {});
std::string to_dot(const UndirectedGraph& g,
                   const std::vector<std::string>& labels = {});

/// Recovered graph with edges styled by classification: solid for true
/// kin edges, dashed red for predicted-spurious, bold red for violations.
std::string to_dot_classified(const PredictionReport& report,
                              const std::vector<std::string>& labels = {});

/// Frequency list plus per-frequency real/imaginary matrix pairs.
std::string spectral_to_json(const SpectralMatrix& s);

std::vector<std::string> default_labels(int n);

}  // namespace netrecon
