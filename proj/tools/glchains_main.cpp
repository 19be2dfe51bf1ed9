#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "glc/chain_io.hpp"
#include "glc/errors.hpp"
#include "glc/energy.hpp"
#include "glc/experiment.hpp"
#include "glc/lowerbound.hpp"
#include "glc/singular.hpp"

using namespace glc;

namespace {

std::vector<Point> parse_simplex(const std::string& text) {
  std::vector<Point> out;
  std::istringstream vertices(text);
  std::string vtx;
  while (std::getline(vertices, vtx, ';')) {
    std::istringstream coords(vtx);
    std::string c;
    Point p{0, 0, 0};
    int d = 0;
    while (std::getline(coords, c, ',') && d < 3) p[d++] = std::stod(c);
    out.push_back(p);
  }
  return out;
}

GroupElement parse_sigma(const std::string& text, GroupKind kind) {
  GroupElement g = GroupElement::zero(kind);
  const auto semi = text.find(';');
  g.a = std::stoi(text.substr(0, semi));
  if (kind == GroupKind::ZxZ_torus && semi != std::string::npos)
    g.b = std::stoi(text.substr(semi + 1));
  return g;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ginzburg-Landau energies, singular chains, and lower bounds"};
  app.require_subcommand(1);

  // --- run ---------------------------------------------------------------
  auto* run = app.add_subcommand("run", "run a configured experiment");
  std::string cfg_path, out_override;
  run->add_option("--config", cfg_path, "JSON or TOML config")->required();
  run->add_option("--output-dir", out_override, "override output directory");

  // --- minimize ----------------------------------------------------------
  auto* mini = app.add_subcommand("minimize", "gradient descent on E_eps");
  std::string in_field, out_field, trace_path;
  double eps = 0.05, tol = 1e-4, initial_step = 0.5;
  int max_iters = 2000;
  mini->add_option("--field", in_field)->required();
  mini->add_option("--eps", eps)->required();
  mini->add_option("--tol", tol);
  mini->add_option("--max-iters", max_iters);
  mini->add_option("--initial-step", initial_step);
  mini->add_option("--out", out_field)->required();
  mini->add_option("--trace", trace_path);

  // --- extract -----------------------------------------------------------
  auto* ext = app.add_subcommand("extract", "extract the singular chain");
  std::string ext_field, ext_out, ext_report, h_text = "auto";
  double ext_eps = 0.05;
  int trials = 16;
  uint64_t seed = 1;
  ext->add_option("--field", ext_field)->required();
  ext->add_option("--eps", ext_eps)->required();
  ext->add_option("--h", h_text, "grid size or 'auto'");
  ext->add_option("--trials", trials);
  ext->add_option("--seed", seed);
  ext->add_option("--out", ext_out)->required();
  ext->add_option("--report", ext_report);

  // --- certify -----------------------------------------------------------
  auto* cert = app.add_subcommand("certify", "energy lower-bound certificate");
  std::string cert_field, cert_out;
  double cert_eps = 0.05;
  int cert_axis = -1;
  cert->add_option("--field", cert_field)->required();
  cert->add_option("--eps", cert_eps)->required();
  cert->add_option("--axis", cert_axis, "slice axis for 3D fields");
  cert->add_option("--out", cert_out)->required();

  // --- dipole ------------------------------------------------------------
  auto* dip = app.add_subcommand("dipole", "insert a dipole along a simplex");
  std::string dip_field, dip_out, dip_sigma = "1", dip_simplex;
  dip->add_option("--field", dip_field)->required();
  dip->add_option("--sigma", dip_sigma, "class, e.g. 1 or 1;-1");
  dip->add_option("--simplex", dip_simplex, "vertices x,y[,z];x,y[,z];...")->required();
  dip->add_option("--out", dip_out)->required();

  // --- make-datum ---------------------------------------------------------
  auto* mk = app.add_subcommand("make-datum", "boundary datum field");
  std::string mk_kind = "disk", mk_target = "circle", mk_out, mk_points;
  int mk_res = 64, mk_degree = 1, mk_degree2 = 0;
  mk->add_option("--kind", mk_kind, "disk | sphere | solid-torus");
  mk->add_option("--target", mk_target, "circle | torus | rp2");
  mk->add_option("--degree", mk_degree);
  mk->add_option("--degree2", mk_degree2);
  mk->add_option("--resolution", mk_res);
  mk->add_option("--points", mk_points, "JSON 0-chain of sphere singularities");
  mk->add_option("--out", mk_out)->required();

  // --- regularize ----------------------------------------------------------
  auto* reg = app.add_subcommand("regularize", "distance-regularise near a chain");
  std::string reg_field, reg_chain, reg_out;
  double reg_eps = 0.05;
  reg->add_option("--field", reg_field)->required();
  reg->add_option("--chain", reg_chain)->required();
  reg->add_option("--eps", reg_eps)->required();
  reg->add_option("--out", reg_out)->required();

  // --- plateau -------------------------------------------------------------
  auto* plat = app.add_subcommand("plateau", "mass-minimising connection");
  std::string plat_bd, plat_out, plat_cfg;
  plat->add_option("--chain", plat_bd, "boundary 0-chain JSON");
  plat->add_option("--config", plat_cfg, "or: experiment config for its prediction");
  plat->add_option("--out", plat_out)->required();

  // --- norm-table ----------------------------------------------------------
  auto* nt = app.add_subcommand("norm-table", "group norm table CSV");
  std::string nt_group = "Z_circle";
  int nt_max = 4;
  nt->add_option("--group", nt_group);
  nt->add_option("--max", nt_max);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      ExperimentConfig cfg = ExperimentConfig::from_file(cfg_path);
      if (!out_override.empty()) cfg.output_dir = out_override;
      const ExperimentReport rep = run_experiment(cfg);
      std::cout << summary_csv(rep);
      return rep.all_ok ? 0 : 1;
    }
    if (*mini) {
      Field u = Field::load(in_field);
      SolverOptions opts;
      opts.max_iters = max_iters;
      opts.grad_tol = tol;
      opts.initial_step = initial_step;
      const MinimizeResult res = minimize(u, eps, opts);
      res.field.save(out_field);
      if (!trace_path.empty()) {
        std::ofstream os(trace_path);
        os << "iter,energy,dirichlet,potential,grad_norm,step\n";
        for (const auto& r : res.trace)
          os << r.iter << ',' << r.energy << ',' << r.dirichlet << ','
             << r.potential << ',' << r.grad_norm << ',' << r.step << '\n';
      }
      std::cout << "energy " << res.report.total << " normalized "
                << res.report.normalized << " iters " << res.iterations << "\n";
      return 0;
    }
    if (*ext) {
      const Field u = Field::load(ext_field);
      const double h =
          h_text == "auto" ? default_grid_size(u, ext_eps) : std::stod(h_text);
      const SingularGrid g = choose_grid(u, h, trials, seed);
      std::vector<double> y0(u.m(), 0.0);
      ExtractStats stats;
      const PolyChain chain = extract_chain(u, g, y0, &stats);
      save_chain(chain, ext_out);
      if (!ext_report.empty()) {
        std::ofstream os(ext_report);
        os << "offset_x,offset_y,offset_z,skeleton_max_dist,n_plaquettes,"
              "n_nonzero,mass\n";
        os << g.offset[0] << ',' << g.offset[1] << ',' << g.offset[2] << ','
           << stats.skeleton_max_dist << ',' << stats.n_plaquettes << ','
           << stats.n_nonzero << ',' << stats.mass << '\n';
      }
      std::cout << "cells " << chain.cells().size() << " mass " << stats.mass
                << "\n";
      return 0;
    }
    if (*cert) {
      const Field u = Field::load(cert_field);
      LowerBoundCertificate c;
      if (u.dims() == 2)
        c = ball_construction(u, cert_eps);
      else
        c = ball_construction_sliced(u, cert_eps, cert_axis < 0 ? 2 : cert_axis);
      nlohmann::json j;
      j["certified_bound"] = c.certified_bound;
      j["measured_energy"] = c.measured_energy;
      j["total_class"] = c.total_class.str();
      j["collar_r"] = c.collar_r;
      j["tau"] = c.tau;
      j["refused_slices"] = c.refused_slices;
      j["sound"] = c.certified_bound <= c.measured_energy;
      j["balls"] = nlohmann::json::array();
      for (const auto& b : c.balls)
        j["balls"].push_back({{"center", {b.center[0], b.center[1], b.center[2]}},
                              {"radius", b.radius},
                              {"class", b.cls.str()}});
      std::ofstream os(cert_out);
      os << j.dump(2) << "\n";
      std::cout << "bound " << c.certified_bound << " energy "
                << c.measured_energy << "\n";
      return 0;
    }
    if (*dip) {
      const Field w = Field::load(dip_field);
      const GroupElement sigma = parse_sigma(dip_sigma, w.target().group_kind());
      insert_dipole(w, parse_simplex(dip_simplex), sigma).save(dip_out);
      return 0;
    }
    if (*mk) {
      DatumSpec spec;
      spec.target = manifold_kind_from_string(mk_target);
      spec.resolution = mk_res;
      spec.degree = mk_degree;
      spec.degree2 = mk_degree2;
      if (mk_kind == "disk") {
        spec.kind = DatumSpec::Kind::DiskDegree;
      } else if (mk_kind == "sphere") {
        spec.kind = DatumSpec::Kind::SpherePoints;
        spec.box_half = 1.05;
        spec.radius = 1.0;
        const PolyChain pts = load_chain(mk_points);
        for (const auto& c : pts.cells()) spec.sphere_points.push_back({c.a, c.mult});
      } else if (mk_kind == "solid-torus") {
        spec.kind = DatumSpec::Kind::SolidTorus;
        spec.box_half = 3.15;
      } else {
        throw InvalidDescriptor("unknown datum kind " + mk_kind);
      }
      make_boundary_datum(spec).save(mk_out);
      return 0;
    }
    if (*reg) {
      const Field w = Field::load(reg_field);
      regularize(w, load_chain(reg_chain), reg_eps).save(reg_out);
      return 0;
    }
    if (*plat) {
      if (!plat_cfg.empty()) {
        save_chain(predict_plateau(ExperimentConfig::from_file(plat_cfg)), plat_out);
        return 0;
      }
      const PolyChain bd = load_chain(plat_bd);
      Box box{{-1e9, -1e9, -1e9}, {1e9, 1e9, 1e9}, bd.ambient()};
      const CoefficientGroup cg(bd.group_kind());
      save_chain(minimal_connection(bd, cg, box), plat_out);
      return 0;
    }
    if (*nt) {
      std::cout << norm_table_csv(group_kind_from_string(nt_group), nt_max);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
