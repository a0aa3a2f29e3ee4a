// treespike: command-line front end.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "treespike/analysis.hpp"
#include "treespike/batch.hpp"
#include "treespike/coupling.hpp"
#include "treespike/io.hpp"
#include "treespike/oracle.hpp"
#include "verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace treespike;

namespace {

constexpr int kOk = 0, kInvalid = 1, kFailed = 2;

struct Common {
  int d = 3;
  std::uint32_t w = 1;
  std::uint32_t w_up = 1;
  std::uint32_t w_down = 1;
  bool allow_zero_weights = false;
  double gamma = 0.5;
  double horizon = 10.0;
  std::string engine = "gillespie";
  std::string mode = "unbounded";
  std::uint32_t cap = 0;
  std::uint64_t seed = 1;
  std::uint64_t max_events = SafetyCaps{}.max_events;
  std::uint64_t max_support = SafetyCaps{}.max_support;
  double certify_eps = 0.0;
  std::string grid;
  std::string out = "out";
  CLI::Option* w_opt = nullptr;
  CLI::Option* w_up_opt = nullptr;
  CLI::Option* w_down_opt = nullptr;

  void add(CLI::App* app, bool with_gamma = true) {
    app->add_option("--d", d, "tree degree (2 = the line)")->capture_default_str();
    w_opt = app->add_option("--w", w, "weight in both directions");
    w_up_opt = app->add_option("--w-up", w_up, "weight sent to the parent")->capture_default_str();
    w_down_opt = app->add_option("--w-down", w_down, "weight sent to each child")->capture_default_str();
    app->add_flag("--allow-zero-weights", allow_zero_weights, "accept w_up = w_down = 0");
    if (with_gamma) app->add_option("--gamma", gamma, "leak rate per unit of potential")->capture_default_str();
    app->add_option("--T", horizon, "time horizon")->capture_default_str();
    app->add_option("--engine", engine, "gillespie or graphical")->capture_default_str();
    app->add_option("--mode", mode, "unbounded, capped or binary")->capture_default_str();
    app->add_option("--cap", cap, "potential cap for capped mode")->capture_default_str();
    app->add_option("--seed", seed, "master seed")->capture_default_str();
    app->add_option("--max-events", max_events, "safety cap on events per run")->capture_default_str();
    app->add_option("--max-support", max_support, "safety cap on active neurons per run")->capture_default_str();
    app->add_option("--certify-eps", certify_eps, "stop runs whose survival to T is certain up to this error")
        ->capture_default_str();
    app->add_option("--grid", grid, "sample times: 'a:b:step' or a comma list");
    app->add_option("--out", out, "output directory")->capture_default_str();
  }

  /// Folds --w into the directional weights so the snapshot records what ran.
  void resolve_weights() {
    if (!w_opt->count()) return;
    if (w_up_opt->count() || w_down_opt->count()) throw std::invalid_argument("give either --w or --w-up/--w-down");
    w_up = w_down = w;
    for (auto* o : {w_up_opt, w_down_opt}) o->clear(), o->add_result(std::to_string(w));
  }

  SimParams params(double default_step_count = 0) const {
    SimParams p;
    p.spec.d = d;
    p.spec.w_up = w_up;
    p.spec.w_down = w_down;
    p.spec.allow_zero_weights = allow_zero_weights;
    p.gamma = gamma;
    p.horizon = horizon;
    p.engine = parse_engine(engine);
    p.mode = parse_mode(mode, cap);
    p.seed = seed;
    p.caps.max_events = max_events;
    p.caps.max_support = max_support;
    p.certify_eps = certify_eps;
    p.grid = parse_grid(grid, horizon, default_step_count);
    p.validate();
    return p;
  }

  static std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
      double a, b, step;
      char c1, c2;
      std::istringstream in(text);
      if (!(in >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || !in.eof())
        throw std::invalid_argument("range must look like a:b:step, got '" + text + "'");
      if (!(step > 0.0) || b < a) throw std::invalid_argument("range needs a <= b and step > 0");
      const auto n = static_cast<long>(std::floor((b - a) / step + 1e-9));
      if (n > 10'000'000) throw std::invalid_argument("range has too many points");
      for (long i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * step);
      return out;
    }
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
      std::size_t used = 0;
      double v;
      try {
        v = std::stod(item, &used);
      } catch (const std::exception&) {
        throw std::invalid_argument("not a number: '" + item + "'");
      }
      if (used != item.size()) throw std::invalid_argument("not a number: '" + item + "'");
      out.push_back(v);
    }
    return out;
  }

  static std::vector<double> parse_grid(const std::string& text, double horizon, double steps) {
    if (!text.empty()) return parse_list(text);
    if (steps <= 0) return {};
    std::vector<double> out;
    for (int i = 0; i <= static_cast<int>(steps); ++i) out.push_back(horizon * i / steps);
    out.back() = horizon;
    return out;
  }
};

std::string padded(std::size_t i, std::size_t n) {
  const int width = static_cast<int>(std::to_string(n > 0 ? n - 1 : 0).size());
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, i);
  return buf;
}

/// Collects outputs and writes the manifest plus a replayable config file.
class Batch {
 public:
  Batch(std::string command, const std::string& dir, std::string config_text, json params, std::uint64_t seed)
      : dir_(dir) {
    fs::create_directories(dir_);
    manifest_.command = std::move(command);
    manifest_.config = {{"toml", config_text}, {"params", std::move(params)}};
    manifest_.seed = seed;
    manifest_.version = io::version();
    manifest_.started = io::utc_now();
    config_text_ = std::move(config_text);
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path path = dir_ / name;
    fs::create_directories(path.parent_path());
    manifest_.outputs.push_back({name, io::write_file(path.string(), content)});
  }

  void flag(std::size_t run, const Trajectory& tr, const std::string& leg = "") {
    ++manifest_.flagged_runs;
    json f{{"run", run}, {"reason", to_string(tr.reason)}, {"end_time", tr.end_time}};
    if (!leg.empty()) f["leg"] = leg;
    manifest_.flags.push_back(std::move(f));
  }

  void finish(std::uint64_t runs) {
    manifest_.runs = runs;
    manifest_.finished = io::utc_now();
    io::write_file((dir_ / "config.toml").string(), config_text_);
    io::write_file((dir_ / "manifest.json").string(), manifest_.to_json().dump(2) + "\n");
    if (manifest_.flagged_runs)
      std::cerr << "warning: " << manifest_.flagged_runs << " run(s) hit a safety cap; see manifest.json\n";
  }

 private:
  fs::path dir_;
  io::Manifest manifest_;
  std::string config_text_;
};

std::string snapshot(const CLI::App& app, const CLI::App* sub) {
  // Only the chosen subcommand's section, with every value spelled out.
  std::string text = sub->config_to_str(true, false);
  std::string out = "[" + sub->get_name() + "]\n";
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '[' || line.rfind("config", 0) == 0 || line.rfind("w=", 0) == 0) continue;
    out += line + "\n";
  }
  (void)app;
  return out;
}

int cmd_simulate(const Common& c, std::size_t runs, bool record_events, double rho, const std::string& config) {
  SimParams p = c.params(100);
  p.rho = rho;
  p.record_events = record_events;
  p.validate();
  if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  auto trajectories = parallel_map(runs, [&](std::size_t r) {
    SimParams q = p;
    q.replicate = r;
    return run(q);
  });
  Batch batch("simulate", c.out, config, io::to_json(p), p.seed);
  json summary{{"params", io::to_json(p)}, {"runs", json::array()}};
  std::uint64_t survived = 0, flagged = 0;
  for (std::size_t r = 0; r < runs; ++r) {
    const auto& tr = trajectories[r];
    std::ostringstream csv;
    io::write_trajectory_csv(csv, tr);
    batch.write("trajectory_" + padded(r, runs) + ".csv", csv.str());
    if (record_events) {
      std::ostringstream ev;
      io::write_events_csv(ev, tr);
      batch.write("events_" + padded(r, runs) + ".csv", ev.str());
    }
    json s = io::to_json(tr);
    s["run"] = r;
    summary["runs"].push_back(std::move(s));
    survived += tr.survives() && !tr.terminated_early;
    if (tr.terminated_early) {
      ++flagged;
      batch.flag(r, tr);
    }
  }
  summary["survived"] = survived;
  summary["flagged_runs"] = flagged;
  batch.write("summary.json", summary.dump(2) + "\n");
  batch.finish(runs);
  std::cout << runs << " run(s), " << survived << " alive at T=" << p.horizon << ", " << flagged
            << " flagged; outputs in " << c.out << "\n";
  return kOk;
}

int cmd_scan(const Common& c, const std::string& target_name, const std::string& gammas_text, std::size_t runs,
             int doublings, int prune_level, const std::string& config) {
  const Proxy target = parse_proxy(target_name);
  const auto gammas = Common::parse_list(gammas_text);
  if (gammas.empty()) throw std::invalid_argument("gamma grid is empty");
  if (!std::is_sorted(gammas.begin(), gammas.end())) throw std::invalid_argument("gamma grid must be sorted");
  for (double g : gammas)
    if (!(g >= 0.0)) throw std::invalid_argument("gamma must be ≥ 0");
  if (doublings < 0) throw std::invalid_argument("doublings must be >= 0");
  SimParams base = c.params();
  if (target == Proxy::local) base.certify_eps = 0.0;

  Batch batch("scan", c.out, config, io::to_json(base), base.seed);
  const auto theory = theory_bracket(target, base.spec);
  json report{{"target", target_name},
              {"theory", {{"lower", theory.theory_lower}, {"upper", theory.theory_upper}}},
              {"horizons", json::array()}};
  ScanResult last;
  bool stable = false;
  for (int k = 0; k <= doublings; ++k) {
    SimParams p = base;
    p.horizon = base.horizon * std::pow(2.0, k);
    p.grid.clear();
    std::vector<SurvivalEstimate> estimates;
    json uppers = json::array();
    for (double g : gammas) {
      p.gamma = g;
      if (target == Proxy::global) {
        estimates.push_back(estimate_survival(p, target, runs));
      } else {
        // Level-pruned runs give a lower bound; the budget gives the upper end.
        const auto b = local_survival_bracket(p, {p.horizon}, prune_level, runs);
        SurvivalEstimate e;
        const auto& pt = b.points.front();
        e.p_hat = pt.p_lower;
        e.ci_half_width = pt.ci_lower;
        e.n_runs = b.n_runs;
        e.successes = static_cast<std::uint64_t>(std::llround(pt.p_lower * static_cast<double>(b.n_runs)));
        e.horizon = p.horizon;
        e.proxy = target;
        e.flagged_runs = b.flagged_runs;
        estimates.push_back(e);
        uppers.push_back({{"gamma", g}, {"p_upper", pt.p_upper}, {"ci_upper", pt.ci_upper}, {"budget_mean", pt.budget_mean}});
      }
    }
    ScanResult scan = bracket_from(target, p.spec, gammas, std::move(estimates));
    json h{{"horizon", p.horizon}, {"scan", io::to_json(scan)}};
    if (target == Proxy::local) h["upper_bounds"] = std::move(uppers), h["prune_level"] = prune_level;
    report["horizons"].push_back(std::move(h));
    std::ostringstream csv;
    io::write_scan_csv(csv, scan);
    batch.write("scan_T" + io::number(p.horizon) + ".csv", csv.str());
    if (k > 0 && scan.bracket.found == last.bracket.found && scan.bracket.gamma_lo == last.bracket.gamma_lo &&
        scan.bracket.gamma_hi == last.bracket.gamma_hi) {
      stable = true;
      last = std::move(scan);
      break;
    }
    last = std::move(scan);
  }
  report["stable"] = stable;
  report["bracket"] = io::to_json(last.bracket);
  report["non_monotone"] = last.non_monotone;
  std::ostringstream csv;
  io::write_scan_csv(csv, last);
  batch.write("scan.csv", csv.str());
  batch.write("scan.json", report.dump(2) + "\n");
  batch.finish(runs * gammas.size());
  const auto& b = last.bracket;
  std::cout << to_string(target) << " scan: theory [" << b.theory_lower << ", " << b.theory_upper << "], ";
  if (b.found)
    std::cout << "empirical bracket [" << b.gamma_lo << ", " << b.gamma_hi << "]";
  else
    std::cout << "no empirical bracket on this grid";
  if (!last.non_monotone.empty()) std::cout << " (non-monotone estimates: horizon may be too short)";
  std::cout << "\n";
  return kOk;
}

int cmd_couple(const Common& c, const std::string& kind, double gamma_low, double gamma_high, std::size_t runs,
               bool inject_fault, const std::string& config) {
  if (kind != "gamma-pair" && kind != "xi-eta" && kind != "triple")
    throw std::invalid_argument("coupling kind must be gamma-pair, xi-eta or triple, got '" + kind + "'");
  if (inject_fault && kind != "gamma-pair") throw std::invalid_argument("fault injection exists for gamma-pair only");
  if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  SimParams p = c.params(100);
  if (kind == "gamma-pair") {
    if (!(gamma_low >= 0.0) || !(gamma_high >= 0.0)) throw std::invalid_argument("gamma must be ≥ 0");
    if (gamma_high < gamma_low) throw std::invalid_argument("gamma-low must not exceed gamma-high");
  }
  struct One {
    std::string csv;
    std::uint64_t violations = 0;
    std::optional<EventRecord> first;
    std::vector<std::pair<std::string, Trajectory>> flagged;
  };
  auto results = parallel_map(runs, [&](std::size_t r) {
    SimParams q = p;
    q.replicate = r;
    One one;
    std::ostringstream csv;
    auto note = [&](const char* leg, const Trajectory& tr) {
      if (tr.terminated_early) one.flagged.emplace_back(leg, tr);
    };
    if (kind == "triple") {
      auto t = run_zeta_eta_xi_triple(q);
      io::write_triple_csv(csv, t);
      one.violations = t.violation_count;
      one.first = t.first_violation;
      note("zeta", t.zeta), note("eta", t.eta), note("xi", t.xi);
    } else {
      auto pair = kind == "xi-eta" ? run_xi_eta_pair(q) : run_gamma_pair(gamma_low, gamma_high, q, inject_fault);
      io::write_coupled_csv(csv, pair);
      one.violations = pair.violation_count;
      one.first = pair.first_violation;
      note("low", pair.traj_low), note("high", pair.traj_high);
    }
    for (auto& [leg, tr] : one.flagged) tr.samples.clear(), tr.events.clear();
    one.csv = csv.str();
    return one;
  });
  Batch batch("couple", c.out, config, io::to_json(p), p.seed);
  json report{{"kind", kind}, {"runs", runs}, {"inject_fault", inject_fault}, {"per_run", json::array()}};
  if (kind == "gamma-pair") report["gamma_low"] = gamma_low, report["gamma_high"] = gamma_high;
  std::uint64_t total = 0, runs_with = 0;
  for (std::size_t r = 0; r < runs; ++r) {
    auto& one = results[r];
    batch.write("runs/run_" + padded(r, runs) + ".csv", one.csv);
    total += one.violations;
    runs_with += one.violations > 0;
    json row{{"run", r}, {"violations", one.violations}, {"flagged", !one.flagged.empty()}};
    if (one.first)
      row["first_violation"] = {{"time", one.first->time}, {"neuron", to_string(one.first->neuron)},
                                {"kind", to_string(one.first->kind)}};
    report["per_run"].push_back(std::move(row));
    for (const auto& [leg, tr] : one.flagged) batch.flag(r, tr, leg);
  }
  report["total_violations"] = total;
  report["runs_with_violations"] = runs_with;
  batch.write("couple.json", report.dump(2) + "\n");
  batch.finish(runs);
  std::cout << kind << ": " << runs << " run(s), " << total << " violation(s) in " << runs_with << " run(s)\n";
  return total ? kFailed : kOk;
}

int cmd_oracle(const std::string& kind, const std::string& graph_text, std::uint32_t w, double gamma,
               const std::string& mode_text, std::uint32_t cap, double t, double eps, const std::string& initial_text,
               int d, const std::string& out) {
  json j;
  if (kind == "gw") {
    const auto g = oracle::gw_extinction(d, gamma);
    j = {{"d", d}, {"gamma", gamma}, {"q", g.q}, {"survival", g.survival},
         {"mean_offspring", (d - 1) / (1.0 + gamma)}};
  } else if (kind == "transient") {
    const auto graph = oracle::parse_graph(graph_text, w);
    const Mode mode = parse_mode(mode_text, cap);
    const auto gen = oracle::enumerate_and_build(graph, gamma, mode);
    std::vector<std::uint32_t> initial;
    for (double v : Common::parse_list(initial_text)) {
      if (v < 0 || v != std::floor(v)) throw std::invalid_argument("initial potentials must be non-negative integers");
      initial.push_back(static_cast<std::uint32_t>(v));
    }
    if (initial.size() != static_cast<std::size_t>(graph.size()))
      throw std::invalid_argument("initial state needs one potential per vertex");
    for (auto v : initial)
      if (v > mode.limit()) throw std::invalid_argument("initial potential exceeds the mode's cap");
    if (!(t >= 0.0)) throw std::invalid_argument("t must be >= 0");
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
    const auto dist = oracle::transient(gen, gen.space.encode(initial), t, eps);
    j = oracle::to_json(gen, dist, graph_text, to_string(mode));
  } else {
    throw std::invalid_argument("oracle kind must be transient or gw, got '" + kind + "'");
  }
  const std::string text = j.dump(2) + "\n";
  if (out.empty() || out == "-")
    std::cout << text;
  else
    io::write_file(out, text);
  return kOk;
}

int cmd_verify(const verify::Options& opt, const std::string& json_path) {
  std::cout << "acceptance suite" << (opt.quick ? " (quick mode: n/10, tolerances x sqrt(10))" : "")
            << (opt.full_scale ? " (full scale)" : "") << ", " << worker_count() << " worker(s)\n";
  const auto results = verify::run_suite(opt, &std::cout);
  if (!json_path.empty()) io::write_file(json_path, verify::report(results, opt).dump(2) + "\n");
  const bool ok = verify::all_passed(results);
  std::cout << (ok ? "all criteria passed" : "some criteria failed") << "\n";
  return ok ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"treespike: exact simulation of spiking neurons on homogeneous trees"};
  app.set_config("--config", "", "TOML configuration; keys live in a section named after the command");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);

  Common sim_c, scan_c, couple_c;
  scan_c.certify_eps = 1e-9;
  scan_c.horizon = 50.0;

  auto* sim = app.add_subcommand("simulate", "simulate trajectories from e_o");
  sim_c.add(sim);
  std::size_t sim_runs = 1;
  bool record_events = false;
  double rho = 0.0;
  sim->add_option("--runs", sim_runs, "number of replicates")->capture_default_str();
  sim->add_flag("--record-events", record_events, "also write each run's event log");
  sim->add_option("--rho", rho, "also sample nu_rho (0 = off)")->capture_default_str();

  auto* scan = app.add_subcommand("scan", "survival estimates over a gamma grid, bracketing a critical value");
  scan_c.add(scan, false);
  std::string target = "global", gammas;
  std::size_t scan_runs = 1000;
  int doublings = 0, prune_level = 10;
  scan->add_option("--target", target, "global or local")->capture_default_str();
  scan->add_option("--gammas", gammas, "gamma grid: 'a:b:step' or a comma list");
  scan->add_option("--runs", scan_runs, "replicates per gamma")->capture_default_str();
  scan->add_option("--doublings", doublings, "repeat with T doubled until the bracket is stable")->capture_default_str();
  scan->add_option("--prune-level", prune_level, "level cut for the local target")->capture_default_str();

  auto* couple = app.add_subcommand("couple", "coupled runs on shared marks with pathwise checks");
  couple_c.add(couple, true);
  std::string kind = "gamma-pair";
  double gamma_low = 0.5, gamma_high = 1.0;
  std::size_t couple_runs = 1000;
  bool inject_fault = false;
  couple->add_option("--kind", kind, "gamma-pair, xi-eta or triple")->capture_default_str();
  couple->add_option("--gamma-low", gamma_low, "low leak rate (gamma-pair)")->capture_default_str();
  couple->add_option("--gamma-high", gamma_high, "high leak rate (gamma-pair)")->capture_default_str();
  couple->add_option("--runs", couple_runs, "number of replicates")->capture_default_str();
  couple->add_flag("--inject-fault", inject_fault, "give the high leg its own spike marks");

  auto* orc = app.add_subcommand("oracle", "exact answers: transient distributions and extinction probabilities");
  std::string orc_kind = "transient", graph = "path:3", orc_mode = "binary", initial = "1,0,0", orc_out;
  std::uint32_t orc_w = 1, orc_cap = 0;
  double orc_gamma = 0.7, orc_t = 1.0, orc_eps = 1e-10;
  int orc_d = 3;
  orc->add_option("--kind", orc_kind, "transient or gw")->capture_default_str();
  orc->add_option("--graph", graph, "path:N, cycle:N, star:K or single")->capture_default_str();
  orc->add_option("--w", orc_w, "edge weight")->capture_default_str();
  orc->add_option("--gamma", orc_gamma, "leak rate")->capture_default_str();
  orc->add_option("--mode", orc_mode, "binary or capped")->capture_default_str();
  orc->add_option("--cap", orc_cap, "cap for capped mode");
  orc->add_option("--t", orc_t, "time")->capture_default_str();
  orc->add_option("--eps", orc_eps, "uniformization truncation error")->capture_default_str();
  orc->add_option("--initial", initial, "initial potentials, comma separated")->capture_default_str();
  orc->add_option("--d", orc_d, "degree (gw)")->capture_default_str();
  orc->add_option("--out", orc_out, "output file (default stdout)");

  auto* ver = app.add_subcommand("verify", "run the acceptance suite");
  verify::Options vopt;
  std::string verify_json;
  ver->add_option("--only", vopt.only, "criterion name or number (repeatable)");
  ver->add_flag("--quick", vopt.quick, "fewer runs, wider tolerances");
  ver->add_flag("--full-scale", vopt.full_scale, "lift the caps that keep the default run short");
  ver->add_option("--seed", vopt.seed, "master seed")->capture_default_str();
  ver->add_option("--json", verify_json, "write the machine-readable report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kInvalid;
  }

  try {
    for (auto* c : {&sim_c, &scan_c, &couple_c}) c->resolve_weights();
    if (*sim) return cmd_simulate(sim_c, sim_runs, record_events, rho, snapshot(app, sim));
    if (*scan) return cmd_scan(scan_c, target, gammas, scan_runs, doublings, prune_level, snapshot(app, scan));
    if (*couple)
      return cmd_couple(couple_c, kind, gamma_low, gamma_high, couple_runs, inject_fault, snapshot(app, couple));
    if (*orc)
      return cmd_oracle(orc_kind, graph, orc_w, orc_gamma, orc_mode, orc_cap, orc_t, orc_eps, initial, orc_d, orc_out);
    if (*ver) return cmd_verify(vopt, verify_json);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
  return kInvalid;
}
