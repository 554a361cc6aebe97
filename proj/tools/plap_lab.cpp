// plap-lab: runs the experiments and writes JSON/CSV reports.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "plap/lab/experiments.hpp"

namespace lab = plap::lab;

namespace {

struct Common {
  std::string config;
  std::string out = "reports";
  std::optional<std::uint64_t> seed;
  bool assert_mode = false;
  bool timing = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "flat key = value configuration file")->check(CLI::ExistingFile);
  sub->add_option("--out", c.out, "output directory for the reports");
  sub->add_option("--seed", c.seed, "base seed (overrides the config)");
  sub->add_flag("--assert", c.assert_mode, "exit nonzero if any check fails");
  sub->add_flag("--timing", c.timing, "record wall-clock runtime in the report");
}

lab::ExperimentConfig load(const Common& c) {
  lab::ExperimentConfig cfg;
  if (!c.config.empty()) {
    std::ifstream is(c.config);
    cfg = lab::parse_config(is);
  }
  if (c.seed) cfg.seed = *c.seed;
  if (c.assert_mode) cfg.assert_mode = true;
  return cfg;
}

int emit(const lab::Report& r, const lab::ExperimentConfig& cfg, const std::string& out) {
  r.write(out);
  int failed = 0;
  for (const auto& c : r.cases) failed += !c.pass;
  for (const auto& a : r.assertions) failed += !a.pass;
  std::cout << r.experiment << ": " << r.cases.size() << " cases, " << r.assertions.size() << " assertions, " << failed
            << " failed -> " << out << "/" << r.experiment << ".json\n";
  return cfg.assert_mode && !r.pass() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Empirical checks of gradient estimates for the p-Laplace system"};
  app.require_subcommand(1);

  using Runner = lab::Report (*)(const lab::ExperimentConfig&, bool);
  const std::vector<std::tuple<std::string, std::string, Runner>> experiments{
      {"basic-estimate", "sharp maximal flux against sharp maximal source", lab::exp_basic_estimate},
      {"decay", "oscillation decay of p-harmonic maps", lab::exp_decay},
      {"oscillation", "weighted oscillation estimate with a modulus", lab::exp_oscillation},
      {"potential", "pointwise potential estimate", lab::exp_potential},
      {"example55", "sharpness example with a non-Dini modulus", lab::exp_example55},
      {"reduction", "norm inequalities and one-dimensional hypotheses", lab::exp_reduction},
  };
  std::vector<Common> opts(experiments.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < experiments.size(); ++i) {
    subs.push_back(app.add_subcommand(std::get<0>(experiments[i]), std::get<1>(experiments[i])));
    add_common(subs.back(), opts[i]);
  }

  auto* nt = app.add_subcommand("norm-table", "norms and seminorms of an element field");
  std::string field, out_dir;
  int M = 0;
  std::vector<double> domain{0.0, 1.0, 0.0, 1.0};
  std::vector<std::string> specs;
  nt->add_option("--field", field, "element field file (elem,row,col,value)")->required()->check(CLI::ExistingFile);
  nt->add_option("--M", M, "cells per side of the mesh the field lives on")->required();
  nt->add_option("--domain", domain, "x0 x1 y0 y1")->expected(4);
  nt->add_option("--norm", specs, "L:q | lorentz:q:r | orlicz:<young> | marcinkiewicz:a | bmo:q | campanato:q:<modulus> | "
                                  "holder:<modulus> | vmo:q")
      ->required();
  nt->add_option("--out", out_dir, "write norm_table.csv here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    for (std::size_t i = 0; i < experiments.size(); ++i)
      if (*subs[i]) {
        const auto cfg = load(opts[i]);
        return emit(std::get<2>(experiments[i])(cfg, opts[i].timing), cfg, opts[i].out);
      }
    if (*nt) {
      const plap::Mesh mesh(plap::Rect{domain[0], domain[1], domain[2], domain[3]}, M);
      std::ifstream is(field);
      const auto f = plap::read_elem_field(is, mesh.element_count());
      const auto rows = lab::norm_table(mesh, f, specs);
      if (out_dir.empty()) {
        lab::write_norm_table(std::cout, rows);
      } else {
        std::filesystem::create_directories(out_dir);
        std::ofstream os(std::filesystem::path(out_dir) / "norm_table.csv");
        lab::write_norm_table(os, rows);
      }
      return 0;
    }
  } catch (const plap::FieldFormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
