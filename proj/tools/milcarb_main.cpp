// Command-line entry point: empirical pipeline (shock extraction, local
// projections), calibration, scenario solving, sweeps, and damage reports.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "milcarb/calibration.hpp"
#include "milcarb/errors.hpp"
#include "milcarb/csv.hpp"
#include "milcarb/local_projections.hpp"
#include "milcarb/panel.hpp"
#include "milcarb/reports.hpp"
#include "milcarb/scenario.hpp"
#include "milcarb/shocks.hpp"
#include "milcarb/solvers.hpp"

namespace {

using namespace milcarb;

void print_summary(const nlohmann::json& j) { std::cout << j.dump() << "\n"; }

PanelDataset load_panel_arg(const std::string& path,
                            const std::string& schema_path) {
  if (schema_path.empty()) return load_panel(path);
  return load_panel(path, KeyValueFile::load(schema_path));
}

ShockVariable parse_var(const std::string& var) {
  if (var == "share") return ShockVariable::Share;
  if (var == "gk") return ShockVariable::GordonKrenn;
  if (var == "hbr") return ShockVariable::HallBarroRedlick;
  throw ConfigError("unknown --var: " + var + " (expected share|gk|hbr)");
}

OutcomeSpec parse_outcome(const std::string& name, bool log_flag) {
  auto field = field_from_name(name);
  if (!field) throw ConfigError("unknown outcome column: " + name);
  OutcomeSpec out;
  out.field = *field;
  out.log = log_flag;
  // Share outcomes are stored as fractions; report them in p.p.
  if (!log_flag && *field == Field::MilShare) out.scale = 100.0;
  return out;
}

std::optional<DamageSpec> damage_spec_from(const KeyValueFile& kv) {
  if (!kv.has("scc")) return std::nullopt;
  DamageSpec spec;
  spec.scc = kv.get_double("scc");
  spec.base_emissions_t = kv.get_double("base_emissions_t");
  spec.base_gdp = kv.get_double("base_gdp");
  return spec;
}

struct GridSpec {
  double from = 0.0, to = 14.0, step = 0.25;
};

GridSpec parse_grid(const std::string& s) {
  GridSpec g;
  if (s.empty()) return g;
  if (std::sscanf(s.c_str(), "%lf:%lf:%lf", &g.from, &g.to, &g.step) != 3)
    throw ConfigError("--grid expects from:to:step");
  return g;
}

int run(int argc, char** argv) {
  CLI::App app{"military buildups, emissions, and the production network"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print help");  // keep --h free for the horizon

  unsigned long long seed = 12345;  // reproducibility of any simulation use
  int threads = 0;
  double tol = 0.0;
  app.add_option("--seed", seed, "random seed for simulation harnesses");
  app.add_option("--threads", threads, "max worker threads (0 = auto)");
  app.add_option("--tol", tol, "override solver tolerance (0 = default)");

  // extract-shocks
  auto* cmd_shocks = app.add_subcommand("extract-shocks",
                                        "Hamilton-filter spending shocks");
  std::string in_panel, in_schema, var = "share", out_path;
  int opt_h = 2, opt_l = 2;
  cmd_shocks->add_option("--input", in_panel, "panel CSV")->required();
  cmd_shocks->add_option("--schema", in_schema, "column schema file");
  cmd_shocks->add_option("--var", var, "share|gk|hbr");
  cmd_shocks->add_option("--h", opt_h, "forecast horizon");
  cmd_shocks->add_option("--l", opt_l, "lag order");
  cmd_shocks->add_option("--out", out_path, "output CSV")->required();

  // lp
  auto* cmd_lp = app.add_subcommand("lp", "panel local projections");
  std::string lp_panel, lp_schema, lp_shocks, lp_outcome = "emissions";
  std::string lp_split = "none", lp_out, lp_plotdata, lp_spillover;
  std::string lp_countries;
  bool lp_log = false, lp_no_year_fe = false;
  int lp_T = 15;
  cmd_lp->add_option("--panel", lp_panel)->required();
  cmd_lp->add_option("--schema", lp_schema);
  cmd_lp->add_option("--shocks", lp_shocks, "shock CSV from extract-shocks");
  cmd_lp->add_option("--outcome", lp_outcome);
  cmd_lp->add_flag("--log", lp_log, "log-transform the outcome");
  cmd_lp->add_option("--T", lp_T, "max horizon");
  cmd_lp->add_option("--split", lp_split, "none|intensity");
  cmd_lp->add_option("--spillover", lp_spillover,
                     "source country whose shocks hit every panel country");
  cmd_lp->add_flag("--no-year-fe", lp_no_year_fe);
  cmd_lp->add_option("--countries", lp_countries,
                     "semicolon-separated country filter");
  cmd_lp->add_option("--out", lp_out)->required();
  cmd_lp->add_option("--plotdata", lp_plotdata, "long-format CSV for plots");

  // calibrate
  auto* cmd_cal = app.add_subcommand("calibrate", "build model parameters");
  std::string cal_dir, cal_out;
  cmd_cal->add_option("--calib", cal_dir, "calibration input directory")
      ->required();
  cmd_cal->add_option("--out", cal_out, "calibration JSON")->required();

  // steady
  auto* cmd_steady = app.add_subcommand("steady", "permanent-shock steady state");
  std::string st_dir, st_scenario, st_out;
  bool st_decompose = false;
  cmd_steady->add_option("--calib", st_dir)->required();
  cmd_steady->add_option("--scenario", st_scenario)->required();
  cmd_steady->add_option("--out", st_out)->required();
  cmd_steady->add_flag("--decompose", st_decompose,
                       "also solve each shock component separately");

  // transition
  auto* cmd_tr = app.add_subcommand("transition", "temporary-shock path");
  std::string tr_dir, tr_scenario, tr_out;
  int tr_T = 200;
  cmd_tr->add_option("--calib", tr_dir)->required();
  cmd_tr->add_option("--scenario", tr_scenario)->required();
  cmd_tr->add_option("--T", tr_T);
  cmd_tr->add_option("--out", tr_out)->required();

  // sweep
  auto* cmd_sweep = app.add_subcommand("sweep", "steady-state shock-size sweep");
  std::string sw_dir, sw_grid, sw_out, sw_presets = "baseline;personnel;material";
  cmd_sweep->add_option("--calib", sw_dir)->required();
  cmd_sweep->add_option("--grid", sw_grid, "from:to:step in p.p.");
  cmd_sweep->add_option("--presets", sw_presets);
  cmd_sweep->add_option("--out", sw_out)->required();

  // damages
  auto* cmd_dam = app.add_subcommand("damages", "SCC damage arithmetic");
  std::string dm_scenario, dm_out;
  double dm_delta = 0.0, dm_scc = 0.0, dm_base_em = 0.0, dm_base_gdp = 0.0;
  cmd_dam->add_option("--scenario", dm_scenario, "scenario file with scc keys");
  cmd_dam->add_option("--delta", dm_delta, "emission change, percent")
      ->required();
  cmd_dam->add_option("--scc", dm_scc);
  cmd_dam->add_option("--base-emissions", dm_base_em, "tons per year");
  cmd_dam->add_option("--base-gdp", dm_base_gdp);
  cmd_dam->add_option("--out", dm_out);

  // pipeline
  auto* cmd_pipe = app.add_subcommand("pipeline", "end-to-end run");
  std::string pp_panel, pp_schema, pp_dir, pp_scenario, pp_outdir;
  cmd_pipe->add_option("--panel", pp_panel)->required();
  cmd_pipe->add_option("--schema", pp_schema);
  cmd_pipe->add_option("--calib", pp_dir)->required();
  cmd_pipe->add_option("--scenario", pp_scenario)->required();
  cmd_pipe->add_option("--outdir", pp_outdir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // usage/config errors
  }

  if (cmd_shocks->parsed()) {
    auto panel = load_panel_arg(in_panel, in_schema);
    auto shocks = extract_shocks(panel, parse_var(var), opt_h, opt_l);
    write_shocks_csv(out_path, shocks);
    size_t count = 0;
    for (const auto& s : shocks) count += s.shocks.size();
    print_summary({{"cmd", "extract-shocks"},
                   {"out", out_path},
                   {"countries", shocks.size()},
                   {"shocks", count}});
  } else if (cmd_lp->parsed()) {
    auto panel = load_panel_arg(lp_panel, lp_schema);
    if (!lp_countries.empty()) {
      KeyValueFile kv =
          KeyValueFile::parse("keep = " + lp_countries, "--countries");
      panel = panel.restrict_countries(kv.get_list_or("keep"));
    }
    LpSpec spec;
    spec.horizon_T = lp_T;
    if (lp_no_year_fe) spec.year_fe = false;
    OutcomeSpec outcome = parse_outcome(lp_outcome, lp_log);

    if (!lp_spillover.empty()) {
      if (lp_shocks.empty())
        throw ConfigError("--spillover requires --shocks");
      ShockSeries source;
      bool found = false;
      for (auto& s : read_shocks_csv(lp_shocks))
        if (s.country == lp_spillover) {
          source = s;
          found = true;
        }
      if (!found)
        throw DataError("no shocks for spillover source " + lp_spillover);
      auto irf = spillover_lp(panel, source, outcome, spec);
      write_irf_csv(lp_out, irf);
      if (!lp_plotdata.empty()) write_irf_plotdata_csv(lp_plotdata, irf);
      print_summary({{"cmd", "lp"},
                     {"mode", "spillover"},
                     {"out", lp_out},
                     {"beta0", irf.beta(0)}});
    } else if (lp_split == "intensity") {
      auto shocks = read_shocks_csv(lp_shocks);
      auto groups = classify_emission_intensity(panel);
      auto [hi, lo] = split_lp(panel, shocks, outcome, spec, groups);
      std::string out_hi = lp_out, out_lo = lp_out;
      auto dot = out_hi.rfind('.');
      if (dot == std::string::npos) dot = out_hi.size();
      out_hi.insert(dot, "_high");
      out_lo.insert(dot, "_low");
      write_irf_csv(out_hi, hi);
      write_irf_csv(out_lo, lo);
      print_summary({{"cmd", "lp"},
                     {"mode", "split"},
                     {"out_high", out_hi},
                     {"out_low", out_lo}});
    } else {
      auto shocks = read_shocks_csv(lp_shocks);
      auto irf = estimate_lp(panel, shocks, outcome, spec);
      write_irf_csv(lp_out, irf);
      if (!lp_plotdata.empty()) write_irf_plotdata_csv(lp_plotdata, irf);
      print_summary({{"cmd", "lp"},
                     {"out", lp_out},
                     {"beta0", irf.beta(0)},
                     {"n0", irf.n_obs[0]}});
    }
  } else if (cmd_cal->parsed()) {
    BalanceReport report;
    auto calib = load_calibration_dir(cal_dir, &report);
    write_text_atomic(cal_out, calib.to_json());
    print_summary({{"cmd", "calibrate"},
                   {"out", cal_out},
                   {"n", calib.n},
                   {"balanced_rows", report.adjusted_rows},
                   {"max_rel_gap", report.max_rel_gap}});
  } else if (cmd_steady->parsed()) {
    auto calib = load_calibration_dir(st_dir);
    auto kv = KeyValueFile::load(st_scenario);
    auto scenario = load_scenario(kv);
    SteadyOptions opts;
    if (tol > 0) opts.tol = tol;
    auto sol = solve_steady(calib, steady_g_hat(scenario, calib), opts);
    auto report = emissions_report(sol, scenario, calib, damage_spec_from(kv));
    nlohmann::json j = nlohmann::json::parse(report.to_json());
    if (st_decompose) {
      auto dec = decompose_shocks(calib, scenario);
      j["decomposition"] = {
          {"weapon_only",
           {{"emissions_pct", 100.0 * (dec.weapon_only.emissions - 1.0)},
            {"intensity_pct", 100.0 * (dec.weapon_only.intensity - 1.0)},
            {"real_gdp_pct", 100.0 * (dec.weapon_only.real_gdp - 1.0)}}},
          {"energy_only",
           {{"emissions_pct", 100.0 * (dec.energy_only.emissions - 1.0)},
            {"intensity_pct", 100.0 * (dec.energy_only.intensity - 1.0)},
            {"real_gdp_pct", 100.0 * (dec.energy_only.real_gdp - 1.0)}}},
          {"nonlinearity_gap", dec.nonlinearity_gap}};
    }
    write_text_atomic(st_out, j.dump(2));
    // Sibling CSV with the per-industry table.
    {
      std::string csv_path = st_out;
      auto dot = csv_path.rfind('.');
      if (dot == std::string::npos) dot = csv_path.size();
      csv_path = csv_path.substr(0, dot) + "_industries.csv";
      std::ostringstream os;
      os << "industry,output_pct,capital_pct,weapon,energy\n";
      for (const auto& r : report.industries)
        os << "\"" << r.label << "\"," << format_double(100.0 * r.output_change)
           << "," << format_double(100.0 * r.capital_change) << ","
           << (r.weapon ? 1 : 0) << "," << (r.energy ? 1 : 0) << "\n";
      write_text_atomic(csv_path, os.str());
    }
    print_summary({{"cmd", "steady"},
                   {"out", st_out},
                   {"emissions_pct", 100.0 * (sol.emissions - 1.0)},
                   {"intensity_pct", 100.0 * (sol.intensity - 1.0)},
                   {"real_gdp_pct", 100.0 * (sol.real_gdp - 1.0)}});
  } else if (cmd_tr->parsed()) {
    auto calib = load_calibration_dir(tr_dir);
    auto scenario = load_scenario_file(tr_scenario);
    TransitionOptions opts;
    opts.T = tr_T;
    if (tol > 0) opts.terminal_tol = tol;
    auto sol = solve_transition(calib, scenario, opts);
    write_transition_csv(tr_out, sol, calib);
    print_summary({{"cmd", "transition"},
                   {"out", tr_out},
                   {"T", sol.T},
                   {"impact_emissions_pct", 100.0 * (sol.emissions(0) - 1.0)},
                   {"terminal_gap", sol.terminal_gap}});
  } else if (cmd_sweep->parsed()) {
    auto calib = load_calibration_dir(sw_dir);
    GridSpec grid = parse_grid(sw_grid);
    KeyValueFile kv = KeyValueFile::parse("presets = " + sw_presets, "--presets");
    auto rows = sweep_steady(calib, kv.get_list_or("presets"), grid.from,
                             grid.to, grid.step);
    write_sweep_csv(sw_out, rows);
    print_summary({{"cmd", "sweep"}, {"out", sw_out}, {"rows", rows.size()}});
  } else if (cmd_dam->parsed()) {
    DamageSpec spec;
    if (!dm_scenario.empty()) {
      auto kv = KeyValueFile::load(dm_scenario);
      auto from_file = damage_spec_from(kv);
      if (from_file) spec = *from_file;
    }
    if (dm_scc > 0) spec.scc = dm_scc;
    if (dm_base_em > 0) spec.base_emissions_t = dm_base_em;
    if (dm_base_gdp > 0) spec.base_gdp = dm_base_gdp;
    auto result = scc_damages(dm_delta, spec);
    nlohmann::json j = {
        {"delta_emissions_pct", dm_delta},
        {"scc", spec.scc},
        {"base_emissions_t", spec.base_emissions_t},
        {"damages_per_year", result.per_year},
        {"damages_share_of_gdp", result.share_of_gdp},
        {"note", "steady-state annual flow; transition path not integrated"}};
    if (!dm_out.empty()) write_text_atomic(dm_out, j.dump(2));
    print_summary(j);
  } else if (cmd_pipe->parsed()) {
    namespace fs = std::filesystem;
    fs::create_directories(pp_outdir);
    auto panel = load_panel_arg(pp_panel, pp_schema);
    auto shocks = extract_shocks(panel, ShockVariable::Share, 2, 2);
    write_shocks_csv(pp_outdir + "/shocks.csv", shocks);

    LpSpec spec;
    OutcomeSpec outcome;
    outcome.field = Field::Emissions;
    outcome.log = true;
    auto irf = estimate_lp(panel, shocks, outcome, spec);
    write_irf_csv(pp_outdir + "/irf.csv", irf);

    auto calib = load_calibration_dir(pp_dir);
    write_text_atomic(pp_outdir + "/calibration.json", calib.to_json());
    auto kv = KeyValueFile::load(pp_scenario);
    auto scenario = load_scenario(kv);

    ScenarioSpec permanent = scenario;
    permanent.rho = 1.0;
    auto steady = solve_steady(calib, steady_g_hat(permanent, calib));
    auto report =
        emissions_report(steady, permanent, calib, damage_spec_from(kv));
    write_text_atomic(pp_outdir + "/steady_report.json", report.to_json());

    ScenarioSpec temporary = scenario;
    if (temporary.rho >= 1.0) temporary.rho = 0.86;
    auto path = solve_transition(calib, temporary);
    write_transition_csv(pp_outdir + "/transition.csv", path, calib);

    print_summary({{"cmd", "pipeline"},
                   {"outdir", pp_outdir},
                   {"steady_emissions_pct", 100.0 * (steady.emissions - 1.0)},
                   {"transition_T", path.T}});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const milcarb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const milcarb::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const milcarb::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
