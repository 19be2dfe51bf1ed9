#include "glc/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "glc/chain_io.hpp"
#include "glc/errors.hpp"
#include "glc/singular.hpp"

namespace glc {

using nlohmann::json;

namespace {
constexpr double kPi = std::numbers::pi;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// ----------------------------------------------------------------------
// Minimal TOML reader for flat `key = value` files with [section] headers.
// Values: strings, numbers, booleans, arrays of numbers.
// ----------------------------------------------------------------------
json parse_toml_subset(const std::string& text) {
  json root = json::object();
  json* scope = &root;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& why) {
    throw std::runtime_error("toml line " + std::to_string(lineno) + ": " + why);
  };
  auto parse_scalar = [&](std::string v) -> json {
    if (v.empty()) fail("empty value");
    if (v.front() == '"') {
      if (v.size() < 2 || v.back() != '"') fail("unterminated string");
      return v.substr(1, v.size() - 2);
    }
    if (v == "true") return true;
    if (v == "false") return false;
    try {
      size_t used = 0;
      if (v.find_first_of(".eE") == std::string::npos) {
        const long long i = std::stoll(v, &used);
        if (used == v.size()) return i;
      }
      const double d = std::stod(v, &used);
      if (used == v.size()) return d;
    } catch (...) {
    }
    fail("cannot parse value '" + v + "'");
    return {};
  };
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return std::string();
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  };
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("bad section header");
      const std::string name = trim(line.substr(1, line.size() - 2));
      scope = &root[name];
      if (!scope->is_object()) *scope = json::object();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (!val.empty() && val.front() == '[') {
      if (val.back() != ']') fail("unterminated array");
      json arr = json::array();
      std::string inner = val.substr(1, val.size() - 2);
      std::istringstream items(inner);
      std::string item;
      while (std::getline(items, item, ',')) {
        item = trim(item);
        if (!item.empty()) arr.push_back(parse_scalar(item));
      }
      (*scope)[key] = arr;
    } else {
      (*scope)[key] = parse_scalar(val);
    }
  }
  return root;
}

std::string experiment_kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::DiskDegree: return "disk_degree";
    case ExperimentKind::MinimalConnection: return "minimal_connection";
    case ExperimentKind::SolidTorus: return "solid_torus";
    case ExperimentKind::NormTable: return "norm_table";
    case ExperimentKind::CertifyOnly: return "certify_only";
  }
  return "?";
}

ExperimentKind experiment_kind_from(const std::string& s) {
  if (s == "disk_degree") return ExperimentKind::DiskDegree;
  if (s == "minimal_connection") return ExperimentKind::MinimalConnection;
  if (s == "solid_torus") return ExperimentKind::SolidTorus;
  if (s == "norm_table") return ExperimentKind::NormTable;
  if (s == "certify_only") return ExperimentKind::CertifyOnly;
  throw std::runtime_error("unknown experiment kind: " + s);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (eps_list.empty()) throw std::runtime_error("eps_list must not be empty");
  for (size_t i = 0; i + 1 < eps_list.size(); ++i)
    if (eps_list[i] <= eps_list[i + 1])
      throw std::runtime_error("eps_list must be strictly decreasing");
  for (double e : eps_list)
    if (e <= 0 || e >= 1) throw std::runtime_error("eps values must lie in (0,1)");
  if (resolution < 16) throw std::runtime_error("resolution too small");
  if (experiment == ExperimentKind::MinimalConnection && classes.empty() &&
      (pairs < 1 || pairs > 4))
    throw std::runtime_error("minimal_connection needs 1 <= pairs <= 4");
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  const json j = json::parse(text);
  ExperimentConfig cfg;
  if (j.contains("experiment"))
    cfg.experiment = experiment_kind_from(j["experiment"].get<std::string>());
  if (j.contains("target")) {
    const auto& t = j["target"];
    if (t.contains("kind"))
      cfg.target = manifold_kind_from_string(t["kind"].get<std::string>());
    if (t.contains("theta0")) cfg.theta0 = t["theta0"].get<double>();
    if (t.contains("delta_star")) cfg.delta_star = t["delta_star"].get<double>();
  }
  auto opt = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j[key].get<std::decay_t<decltype(field)>>();
  };
  opt("degree", cfg.degree);
  opt("degree2", cfg.degree2);
  opt("pairs", cfg.pairs);
  opt("resolution", cfg.resolution);
  opt("h", cfg.h);
  opt("trials", cfg.trials);
  opt("seed", cfg.seed);
  opt("output_dir", cfg.output_dir);
  opt("threads", cfg.threads);
  opt("norm_table_max", cfg.norm_table_max);
  opt("field", cfg.field_path);
  if (j.contains("eps_list")) cfg.eps_list = j["eps_list"].get<std::vector<double>>();
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    if (s.contains("max_iters")) cfg.solver.max_iters = s["max_iters"].get<int>();
    if (s.contains("grad_tol")) cfg.solver.grad_tol = s["grad_tol"].get<double>();
    if (s.contains("initial_step"))
      cfg.solver.initial_step = s["initial_step"].get<double>();
    if (s.contains("record_every"))
      cfg.solver.record_every = s["record_every"].get<int>();
    if (s.contains("step_rule"))
      cfg.solver.step_rule = s["step_rule"].get<std::string>() == "fixed"
                                 ? SolverOptions::StepRule::Fixed
                                 : SolverOptions::StepRule::Backtracking;
  }
  if (j.contains("classes")) {
    const GroupKind gk = TargetManifold(cfg.target).group_kind();
    for (const auto& c : j["classes"]) {
      Point p{0, 0, 0};
      const auto& pt = c.at("point");
      for (size_t d = 0; d < pt.size() && d < 3; ++d) p[d] = pt[d].get<double>();
      GroupElement g = GroupElement::zero(gk);
      g.a = c.at("mult")[0].get<int>();
      if (gk == GroupKind::ZxZ_torus && c.at("mult").size() > 1)
        g.b = c.at("mult")[1].get<int>();
      cfg.classes.push_back({p, g});
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path);
  std::string text((std::istreambuf_iterator<char>(is)),
                   std::istreambuf_iterator<char>());
  const bool looks_json = text.find_first_not_of(" \t\r\n") != std::string::npos &&
                          text[text.find_first_not_of(" \t\r\n")] == '{';
  if (looks_json ||
      (path.size() > 5 && path.substr(path.size() - 5) == ".json"))
    return from_json_text(text);
  return from_json_text(parse_toml_subset(text).dump());
}

std::string ExperimentConfig::to_json_text() const {
  json j;
  j["experiment"] = experiment_kind_name(experiment);
  j["target"] = {{"kind", to_string(target)},
                 {"theta0", theta0},
                 {"delta_star", delta_star}};
  j["degree"] = degree;
  j["degree2"] = degree2;
  j["pairs"] = pairs;
  j["eps_list"] = eps_list;
  j["resolution"] = resolution;
  j["h"] = h;
  j["trials"] = trials;
  j["solver"] = {
      {"max_iters", solver.max_iters},
      {"grad_tol", solver.grad_tol},
      {"step_rule",
       solver.step_rule == SolverOptions::StepRule::Fixed ? "fixed" : "backtracking"},
      {"initial_step", solver.initial_step},
      {"record_every", solver.record_every}};
  j["seed"] = seed;
  j["output_dir"] = output_dir;
  j["threads"] = threads;
  if (!classes.empty()) {
    json cl = json::array();
    for (const auto& [p, g] : classes) {
      json c;
      c["point"] = {p[0], p[1], p[2]};
      c["mult"] = g.kind == GroupKind::ZxZ_torus ? json::array({g.a, g.b})
                                                 : json::array({g.a});
      cl.push_back(c);
    }
    j["classes"] = cl;
  }
  return j.dump(2);
}

// ----------------------------------------------------------------------
// Predictions
// ----------------------------------------------------------------------

PolyChain minimal_connection_boundary(const ExperimentConfig& cfg) {
  const TargetManifold tm(cfg.target);
  PolyChain bd(0, 3, tm.group_kind());
  if (!cfg.classes.empty()) {
    for (const auto& [p, g] : cfg.classes) bd.add_point(p, g);
    return bd;
  }
  // 2*pairs random paired singularities on the unit sphere.
  std::mt19937_64 rng(cfg.seed * 9176 + 11);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto draw = [&]() {
    Point p{gauss(rng), gauss(rng), gauss(rng)};
    return (1.0 / norm(p)) * p;
  };
  for (int k = 0; k < cfg.pairs; ++k) {
    const GroupElement plus = tm.group_kind() == GroupKind::Z_circle
                                  ? GroupElement::z(1)
                                  : GroupElement::z2(1);
    bd.add_point(draw(), plus);
    bd.add_point(draw(), plus.neg());
  }
  return bd;
}

PolyChain predict_plateau(const ExperimentConfig& cfg) {
  const TargetManifold tm(cfg.target);
  switch (cfg.experiment) {
    case ExperimentKind::DiskDegree: {
      PolyChain pred(0, 2, tm.group_kind());
      const int d = cfg.degree;
      if (d == 0) return pred;
      const GroupElement unit = tm.group_kind() == GroupKind::Z_circle
                                    ? GroupElement::z(d > 0 ? 1 : -1)
                                    : GroupElement::z2(1);
      const int count = tm.group_kind() == GroupKind::Z2_projective
                            ? (std::abs(d) & 1)
                            : std::abs(d);
      if (count == 1) {
        pred.add_point({0, 0, 0}, unit);
      } else {
        for (int k = 0; k < count; ++k) {
          const double ang = 2.0 * kPi * k / count;
          pred.add_point({0.4 * std::cos(ang), 0.4 * std::sin(ang), 0}, unit);
        }
      }
      return pred;
    }
    case ExperimentKind::MinimalConnection: {
      const PolyChain bd = minimal_connection_boundary(cfg);
      Box ball_box{{-1, -1, -1}, {1, 1, 1}, 3};
      return minimal_connection(bd, tm.group(), ball_box);
    }
    case ExperimentKind::SolidTorus: {
      PolyChain pred(1, 3, tm.group_kind());
      const int segs = 64;
      for (int k = 0; k < segs; ++k) {
        // half-step offset keeps vertices off the reference disk plane
        const double a0 = 2.0 * kPi * (k + 0.5) / segs;
        const double a1 = 2.0 * kPi * (k + 1.5) / segs;
        pred.add_segment({std::cos(a0), std::sin(a0), 0},
                         {std::cos(a1), std::sin(a1), 0}, GroupElement::z(1));
      }
      return pred;
    }
    default:
      throw std::runtime_error("no plateau prediction for this experiment");
  }
}

// ----------------------------------------------------------------------
// Disk competitor
// ----------------------------------------------------------------------

Field disk_competitor_field(const ExperimentConfig& cfg, double eps,
                            const std::vector<Point>& positions) {
  if (cfg.target != ManifoldKind::Circle)
    throw std::runtime_error("disk competitor is built for the circle target");
  DatumSpec ds;
  ds.kind = DatumSpec::Kind::DiskDegree;
  ds.target = cfg.target;
  ds.resolution = cfg.resolution;
  ds.degree = cfg.degree;
  Field f = make_boundary_datum(ds);

  const int d_sign = cfg.degree >= 0 ? 1 : -1;
  auto raw_phase = [&](const Point& x) {
    double re = 1.0, im = 0.0;
    for (const auto& z : positions) {
      const double ax = x[0] - z[0], ay = (x[1] - z[1]) * d_sign;
      const double r = std::hypot(ax, ay);
      const double fr = ax / r, fi = ay / r;
      const double nre = re * fr - im * fi;
      im = re * fi + im * fr;
      re = nre;
    }
    return std::atan2(im, re);
  };

  // Unwrapped boundary phase correction: datum phase minus raw phase along
  // the rim, continuous in theta.
  const int K = 2048;
  std::vector<double> corr(K + 1);
  double prev = 0.0;
  for (int k = 0; k <= K; ++k) {
    const double theta = 2.0 * kPi * k / K;
    const Point rim{ds.radius * std::cos(theta), ds.radius * std::sin(theta), 0};
    double c = cfg.degree * theta - raw_phase(rim);
    if (k == 0) {
      c = std::remainder(c, 2.0 * kPi);
    } else {
      c = prev + std::remainder(c - prev, 2.0 * kPi);
    }
    corr[k] = prev = c;
  }

  for (int i = 0; i < f.shape()[0]; ++i)
    for (int j = 0; j < f.shape()[1]; ++j) {
      const size_t id = f.index(i, j);
      if (f.is_dirichlet(id)) continue;  // exact datum already in place
      const Point x = f.position(i, j);
      const double r = std::hypot(x[0], x[1]);
      double theta = std::atan2(x[1], x[0]);
      if (theta < 0) theta += 2.0 * kPi;
      const double t = theta / (2.0 * kPi) * K;
      const int k0 = std::min(int(t), K - 1);
      const double c = corr[k0] + (t - k0) * (corr[k0 + 1] - corr[k0]);
      const double ramp = std::clamp((r / ds.radius - 0.4) / 0.5, 0.0, 1.0);
      const double phase = raw_phase(x) + c * ramp;
      auto v = f.value(id);
      v[0] = std::cos(phase);
      v[1] = std::sin(phase);
    }

  PolyChain sing(0, 2, GroupKind::Z_circle);
  for (const auto& z : positions) sing.add_point(z, GroupElement::z(d_sign));
  return regularize(f, sing, eps);
}

// ----------------------------------------------------------------------
// Experiment driver
// ----------------------------------------------------------------------

namespace {

void perturb_interior(Field& f, uint64_t seed, double amplitude) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-amplitude, amplitude);
  const size_t N = f.node_count();
  for (size_t id = 0; id < N; ++id) {
    if (f.mask(id) != kInterior) continue;
    auto v = f.value(id);
    for (int q = 0; q < f.m(); ++q) v[q] += unif(rng);
  }
}

void write_trace(const std::string& path, const std::vector<TraceRow>& trace) {
  std::ofstream os(path);
  os << "iter,energy,dirichlet,potential,grad_norm,step\n";
  for (const auto& r : trace)
    os << r.iter << ',' << fmt(r.energy) << ',' << fmt(r.dirichlet) << ','
       << fmt(r.potential) << ',' << fmt(r.grad_norm) << ',' << fmt(r.step) << '\n';
}

EpsRow run_row(const ExperimentConfig& cfg, const PolyChain& prediction,
               size_t row_index, double eps) {
  EpsRow row;
  row.eps = eps;
  const auto t0 = std::chrono::steady_clock::now();
  const TargetManifold tm(cfg.target, cfg.theta0, cfg.delta_star);

  // Seed field.
  DatumSpec ds;
  ds.target = cfg.target;
  ds.resolution = cfg.resolution;
  switch (cfg.experiment) {
    case ExperimentKind::DiskDegree:
      ds.kind = DatumSpec::Kind::DiskDegree;
      ds.degree = cfg.degree;
      ds.degree2 = cfg.degree2;
      break;
    case ExperimentKind::SolidTorus:
      ds.kind = DatumSpec::Kind::SolidTorus;
      ds.box_half = 3.15;
      break;
    case ExperimentKind::MinimalConnection: {
      ds.kind = DatumSpec::Kind::SpherePoints;
      ds.box_half = 1.05;
      ds.radius = 1.0;
      const PolyChain bd = minimal_connection_boundary(cfg);
      for (const auto& c : bd.cells()) ds.sphere_points.push_back({c.a, c.mult});
      break;
    }
    default:
      throw std::runtime_error("row pipeline only runs field experiments");
  }
  Field u0 = make_boundary_datum(ds);
  if (cfg.experiment == ExperimentKind::DiskDegree && std::abs(cfg.degree) > 1)
    perturb_interior(u0, cfg.seed * 1000003 + row_index, 0.05);

  MinimizeResult mr = minimize(u0, eps, cfg.solver);
  row.minimized = mr.field;
  row.trace = mr.trace;
  row.energy = mr.report.total;
  row.normalized = mr.report.normalized;

  const double hh = cfg.h > 0 ? cfg.h : default_grid_size(mr.field, eps);
  const SingularGrid grid =
      choose_grid(mr.field, hh, cfg.trials, cfg.seed * 7919 + row_index);
  std::vector<double> y0(tm.ambient_dim(), 0.0);
  ExtractStats stats;
  row.chain = extract_chain(mr.field, grid, y0, &stats);
  row.chain_mass = stats.mass;
  row.support_dist = support_distance(row.chain, prediction, tm.group());

  if (cfg.experiment == ExperimentKind::SolidTorus) {
    const DiskSpec disk{{2, 0, 0}, 1.5, {0, 1, 0}};
    row.total_class_value = intersection_index(row.chain, disk);
  } else if (row.chain.q() == 0) {
    row.total_class_value = row.chain.total_class();
  } else {
    row.total_class_value = row.chain.boundary().total_class();
  }
  row.total_class = row.total_class_value.str();

  try {
    if (mr.field.dims() == 2) {
      row.cert_bound = ball_construction(mr.field, eps).certified_bound;
    } else {
      const int axis = cfg.experiment == ExperimentKind::SolidTorus ? 1 : 2;
      row.cert_bound = ball_construction_sliced(mr.field, eps, axis).certified_bound;
    }
  } catch (const NotAdmissible& e) {
    row.cert_bound = 0.0;
    row.error = e.what();
  } catch (const BoundaryTouch& e) {
    row.cert_bound = 0.0;
    row.error = e.what();
  }

  if (cfg.experiment == ExperimentKind::DiskDegree &&
      cfg.target == ManifoldKind::Circle && cfg.degree != 0) {
    std::vector<Point> pos;
    for (const auto& c : prediction.cells()) pos.push_back(c.a);
    row.competitor_energy =
        energy(disk_competitor_field(cfg, eps, pos), eps).total;
  }

  const auto t1 = std::chrono::steady_clock::now();
  row.runtime_s = std::chrono::duration<double>(t1 - t0).count();
  return row;
}

}  // namespace

std::string norm_table_csv(GroupKind kind, int max_entry) {
  const CoefficientGroup cg(kind);
  std::ostringstream os;
  os << "sigma,e_min,norm,in_S\n";
  auto emit = [&](const GroupElement& g) {
    os << g.str() << ',' << fmt(cg.e_min(g)) << ',' << fmt(cg.norm(g)) << ','
       << (cg.in_generators(g) ? 1 : 0) << '\n';
  };
  switch (kind) {
    case GroupKind::Z_circle:
      for (int d = -max_entry; d <= max_entry; ++d) emit(GroupElement::z(d));
      break;
    case GroupKind::Z2_projective:
      emit(GroupElement::z2(0));
      emit(GroupElement::z2(1));
      break;
    case GroupKind::ZxZ_torus:
      for (int a = -max_entry; a <= max_entry; ++a)
        for (int b = -max_entry; b <= max_entry; ++b)
          emit(GroupElement::torus(a, b));
      break;
  }
  return os.str();
}

std::string summary_csv(const ExperimentReport& report) {
  std::ostringstream os;
  os << "eps,energy,normalized,cert_bound,chain_mass,total_class,support_dist,"
        "runtime_s\n";
  for (const auto& r : report.rows) {
    if (r.failed) {
      os << fmt(r.eps) << ",failed,,,,,," << '\n';
      continue;
    }
    os << fmt(r.eps) << ',' << fmt(r.energy) << ',' << fmt(r.normalized) << ','
       << fmt(r.cert_bound) << ',' << fmt(r.chain_mass) << ',' << r.total_class
       << ',' << fmt(r.support_dist) << ',' << fmt(r.runtime_s) << '\n';
  }
  return os.str();
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  {
    std::ofstream os(fs::path(cfg.output_dir) / "config.json");
    os << cfg.to_json_text() << "\n";
  }

  ExperimentReport report;
  if (cfg.experiment == ExperimentKind::NormTable) {
    const GroupKind gk = TargetManifold(cfg.target).group_kind();
    std::ofstream os(fs::path(cfg.output_dir) / "norm_table.csv");
    os << norm_table_csv(gk, cfg.norm_table_max);
    return report;
  }

  if (cfg.experiment == ExperimentKind::CertifyOnly) {
    const Field f = Field::load(cfg.field_path);
    for (size_t i = 0; i < cfg.eps_list.size(); ++i) {
      EpsRow row;
      row.eps = cfg.eps_list[i];
      row.energy = energy(f, row.eps).total;
      row.normalized = row.energy / std::abs(std::log(row.eps));
      try {
        row.cert_bound = f.dims() == 2
                             ? ball_construction(f, row.eps).certified_bound
                             : ball_construction_sliced(f, row.eps, 2).certified_bound;
      } catch (const std::exception& e) {
        row.cert_bound = 0.0;
        row.error = e.what();
      }
      report.rows.push_back(std::move(row));
    }
    std::ofstream os(fs::path(cfg.output_dir) / "summary.csv");
    os << summary_csv(report);
    return report;
  }

  report.prediction = predict_plateau(cfg);
  const TargetManifold tm(cfg.target);
  report.prediction_mass = report.prediction.mass(tm.group());
  save_chain(report.prediction, (fs::path(cfg.output_dir) / "prediction.json").string());

  int threads = cfg.threads;
  if (threads <= 0) {
    if (const char* env = std::getenv("GLCHAINS_THREADS"))
      threads = std::max(1, std::atoi(env));
    else
      threads = 1;
  }
  threads = std::min<int>(threads, int(cfg.eps_list.size()));

  report.rows.resize(cfg.eps_list.size());
  std::atomic<size_t> next{0};
  std::mutex io_mutex;
  auto worker = [&]() {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= cfg.eps_list.size()) break;
      EpsRow row;
      try {
        row = run_row(cfg, report.prediction, i, cfg.eps_list[i]);
      } catch (const std::exception& e) {
        row.eps = cfg.eps_list[i];
        row.failed = true;
        row.error = e.what();
      }
      if (!row.failed) {
        std::lock_guard<std::mutex> lock(io_mutex);
        const std::string tag = "row" + std::to_string(i);
        row.minimized.save((fs::path(cfg.output_dir) / (tag + "_field.glf")).string());
        save_chain(row.chain, (fs::path(cfg.output_dir) / (tag + "_chain.json")).string());
        write_trace((fs::path(cfg.output_dir) / (tag + "_trace.csv")).string(), row.trace);
      }
      report.rows[i] = std::move(row);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  for (const auto& r : report.rows)
    if (r.failed) report.all_ok = false;
  std::ofstream os(fs::path(cfg.output_dir) / "summary.csv");
  os << summary_csv(report);
  return report;
}

}  // namespace glc
