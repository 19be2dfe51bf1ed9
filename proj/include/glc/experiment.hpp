#pragma once

#include <optional>
#include <string>
#include <vector>

#include "glc/chain.hpp"
#include "glc/energy.hpp"
#include "glc/field.hpp"
#include "glc/lowerbound.hpp"

namespace glc {

enum class ExperimentKind {
  DiskDegree,
  MinimalConnection,
  SolidTorus,
  NormTable,
  CertifyOnly,
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::DiskDegree;
  ManifoldKind target = ManifoldKind::Circle;
  double theta0 = -1.0;
  double delta_star = -1.0;
  int degree = 1;
  int degree2 = 0;
  int pairs = 2;  // minimal connection: 2*pairs boundary singularities
  std::vector<std::pair<Point, GroupElement>> classes;  // explicit singularities
  std::vector<double> eps_list = {0.1, 0.05, 0.025};
  int resolution = 128;
  double h = -1.0;  // singular-grid size; auto when <= 0
  int trials = 16;
  SolverOptions solver;
  uint64_t seed = 1;
  std::string output_dir = "out";
  int threads = 0;  // 0: GLCHAINS_THREADS or 1
  int norm_table_max = 4;
  std::string field_path;  // certify_only input

  void validate() const;
  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
};

struct EpsRow {
  double eps = 0.0;
  double energy = 0.0;
  double normalized = 0.0;
  double cert_bound = 0.0;
  double chain_mass = 0.0;
  std::string total_class;
  double support_dist = 0.0;
  double runtime_s = 0.0;
  bool failed = false;
  std::string error;
  // extras used by the acceptance suite (not part of the summary schema)
  PolyChain chain{0, 2, GroupKind::Z_circle};
  Field minimized;
  double competitor_energy = 0.0;
  GroupElement total_class_value;
  std::vector<TraceRow> trace;
};

struct ExperimentReport {
  std::vector<EpsRow> rows;
  PolyChain prediction{0, 2, GroupKind::Z_circle};
  double prediction_mass = 0.0;
  bool all_ok = true;
};

PolyChain predict_plateau(const ExperimentConfig& cfg);
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Explicit recovery-type competitor for the degree-d disk: product of unit
// vortices at the given positions, phase-corrected to match the boundary
// datum, then distance-regularised at scale eps.
Field disk_competitor_field(const ExperimentConfig& cfg, double eps,
                            const std::vector<Point>& positions);

// Boundary 0-chain for the minimal-connection experiment (explicit classes,
// or seeded random paired points on the sphere).
PolyChain minimal_connection_boundary(const ExperimentConfig& cfg);

std::string norm_table_csv(GroupKind kind, int max_entry);
std::string summary_csv(const ExperimentReport& report);

}  // namespace glc
