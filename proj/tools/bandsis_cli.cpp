// Command-line interface for the band-matching library.
//
// Subcommands: count, estimate, moments, optprobs, tables, clt, diag.
// Output is a JSON document on stdout (default) or CSV with --format csv.
// Progress/diagnostic text, if any, goes to stderr only.
//
// Exit codes: 0 success, 1 computational error (message on stderr),
// 2 malformed command line.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bandsis/bandsis.hpp"

namespace {

using nlohmann::json;

// Flatten json (an object, or an array of flat objects) to CSV. Keys are
// emitted in alphabetical order, matching nlohmann's object ordering.
std::string to_csv(const json& doc) {
  auto cell = [](const json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
  };
  std::string out;
  auto emit_header = [&](const json& obj) {
    bool first = true;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (!first) out += ',';
      first = false;
      out += it.key();
    }
    out += '\n';
  };
  auto emit_row = [&](const json& obj) {
    bool first = true;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (!first) out += ',';
      first = false;
      out += cell(it.value());
    }
    out += '\n';
  };
  if (doc.is_array()) {
    if (doc.empty()) return out;
    emit_header(doc.front());
    for (const auto& row : doc) emit_row(row);
  } else {
    json flat = json::object();
    json arrays = json::object();
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      if (it.value().is_array() || it.value().is_object()) {
        arrays[it.key()] = it.value();
      } else {
        flat[it.key()] = it.value();
      }
    }
    if (!flat.empty()) {
      emit_header(flat);
      emit_row(flat);
    }
    for (auto it = arrays.begin(); it != arrays.end(); ++it) {
      out += it.key();
      out += '\n';
      out += to_csv(it.value());
    }
  }
  return out;
}

void print_doc(const json& doc, const std::string& format) {
  if (format == "csv") {
    std::cout << to_csv(doc);
  } else {
    std::cout << doc.dump(2) << '\n';
  }
}

json spec_json(const bandsis::BandSpec& spec) {
  return json{{"s", spec.s}, {"t", spec.t}, {"n", spec.n}};
}

json table3_json(int t_max) {
  json rows = json::array();
  for (int t = 1; t <= t_max; ++t) {
    bandsis::OptProbs probs = bandsis::solve_opt_probs(t);
    json row;
    row["t"] = t;
    row["p"] = probs.p;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counting and importance sampling for band-restricted "
               "permanents"};
  app.require_subcommand(1);

  std::string format = "json";
  app.add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();

  int s = 1, t = 1, n = 1;
  std::string graph_path;
  std::string sampler_name = "sequence";
  std::uint64_t n_samples = 10000;
  std::uint64_t seed = 0;  // seeds are full 64-bit values
  int workers = 1;
  int opt_t = 0;
  bool opt_table = false;
  std::string which = "1";
  std::string diag_kind;
  int n_big = 2048;
  std::uint64_t trials = 10000;

  auto add_spec_opts = [&](CLI::App* cmd, bool required_n = true) {
    cmd->add_option("--s", s, "Band width below the diagonal")->check(CLI::PositiveNumber);
    cmd->add_option("--t", t, "Band width above the diagonal")->check(CLI::PositiveNumber);
    auto* opt_n = cmd->add_option("--n", n, "Number of vertices per side")
                      ->check(CLI::PositiveNumber);
    if (required_n) opt_n->required();
  };

  // count and estimate accept either a band spec (--n required) or --graph;
  // the choice is validated after parsing so that a missing --n is still a
  // usage error (exit 2) while an unreadable graph file is a runtime error
  // (exit 1).
  CLI::App* cmd_count = app.add_subcommand("count", "Exact matching count");
  add_spec_opts(cmd_count, /*required_n=*/false);
  cmd_count->add_option("--graph", graph_path,
                        "Adjacency-matrix file (permanent of a general "
                        "bipartite graph, n <= 30)")
      ->excludes(cmd_count->get_option("--n"));

  CLI::App* cmd_estimate =
      app.add_subcommand("estimate", "Importance-sampling estimate of the count");
  add_spec_opts(cmd_estimate, /*required_n=*/false);
  cmd_estimate->add_option("--sampler", sampler_name, "Sampling rule")
      ->check(CLI::IsMember({"uniform", "sequence", "opt-t1", "limiting"}))
      ->capture_default_str();
  cmd_estimate->add_option("--samples", n_samples, "Number of samples")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd_estimate->add_option("--seed", seed, "RNG seed (64-bit)")->capture_default_str();
  cmd_estimate->add_option("--workers", workers, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd_estimate->add_option("--graph", graph_path, "Adjacency-matrix file")
      ->excludes(cmd_estimate->get_option("--n"));

  CLI::App* cmd_moments =
      app.add_subcommand("moments", "Exact theta moments and derived constants");
  add_spec_opts(cmd_moments);

  CLI::App* cmd_optprobs =
      app.add_subcommand("optprobs", "Optimal t=1 sampling probabilities");
  cmd_optprobs->add_option("--t", opt_t, "Band parameter t")->check(CLI::PositiveNumber);
  cmd_optprobs->add_flag("--table", opt_table, "Emit the full table for t = 1..9");

  CLI::App* cmd_tables = app.add_subcommand("tables", "Reproduce the published tables");
  cmd_tables->add_option("--which", which, "Table to compute")
      ->check(CLI::IsMember({"1", "2", "3", "mcmc"}))
      ->capture_default_str();
  cmd_tables->add_option("--n-big", n_big, "Extraction size for --which 1 (power of two)")
      ->capture_default_str();

  CLI::App* cmd_clt = app.add_subcommand("clt", "CLT diagnostic for theta");
  add_spec_opts(cmd_clt);
  cmd_clt->add_option("--samples", n_samples, "Number of samples")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd_clt->add_option("--seed", seed, "RNG seed (64-bit)")->capture_default_str();
  cmd_clt->add_option("--workers", workers, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  CLI::App* cmd_diag = app.add_subcommand("diag", "Chain diagnostics");
  cmd_diag
      ->add_option("--kind", diag_kind,
                   "One of corr, coupling, states, naive, crossover, "
                   "conjecture, required")
      ->required()
      ->check(CLI::IsMember({"corr", "coupling", "states", "naive",
                             "crossover", "conjecture", "required"}));
  add_spec_opts(cmd_diag, /*required_n=*/false);
  cmd_diag->add_option("--trials", trials, "Coupling trials")->capture_default_str();
  cmd_diag->add_option("--seed", seed, "RNG seed (64-bit)")->capture_default_str();

  // Let the global --format option appear after a subcommand name.
  for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  for (CLI::App* cmd : {cmd_count, cmd_estimate}) {
    if (*cmd && graph_path.empty() && cmd->count("--n") == 0) {
      std::cerr << cmd->get_name() << ": either --n or --graph is required\n";
      return 2;
    }
  }

  try {
    json doc;
    if (*cmd_count) {
      if (!graph_path.empty()) {
        bandsis::BipartiteGraph g = bandsis::BipartiteGraph::load(graph_path);
        bandsis::BigInt cnt = bandsis::permanent_ryser(g);
        doc["n"] = g.n();
        doc["count_decimal"] = cnt.get_str();
        doc["log_count"] = bandsis::log_of_bigint(cnt);
      } else {
        bandsis::BandSpec spec{s, t, n};
        doc = spec_json(spec);
        doc["log_count"] = bandsis::log_count_matchings(spec);
        if (n <= bandsis::kMaxExactN) {
          doc["count_decimal"] = bandsis::count_matchings(spec).get_str();
        }
      }
    } else if (*cmd_estimate) {
      bandsis::ISEstimate est;
      if (!graph_path.empty()) {
        bandsis::BipartiteGraph g = bandsis::BipartiteGraph::load(graph_path);
        est = bandsis::estimate_count_graph(g, n_samples, seed, workers);
        doc["n"] = g.n();
        doc["sampler"] = "uniform";
      } else {
        bandsis::BandSpec spec{s, t, n};
        bandsis::SamplerKind kind = bandsis::SamplerKind::kSequence;
        if (sampler_name == "uniform") kind = bandsis::SamplerKind::kUniform;
        if (sampler_name == "opt-t1") kind = bandsis::SamplerKind::kWeightedT1;
        if (sampler_name == "limiting") kind = bandsis::SamplerKind::kLimiting;
        est = bandsis::estimate_count(spec, kind, n_samples, seed, workers);
        doc = spec_json(spec);
        doc["sampler"] = sampler_name;
      }
      doc["log_estimate"] = est.log_estimate;
      doc["stderr_log"] = est.stderr_log;
      doc["ess"] = est.ess;
      doc["n_samples"] = est.n_samples;
      doc["seed"] = seed;
    } else if (*cmd_moments) {
      bandsis::MomentReport mr = bandsis::moment_report({s, t, n});
      doc = spec_json(mr.spec);
      doc["e_theta"] = mr.e_theta;
      doc["var_theta"] = mr.var_theta;
      doc["log_count"] = mr.log_count;
      doc["e_log_rho"] = mr.e_log_rho;
      doc["var_log_rho"] = mr.var_log_rho;
      doc["c_n"] = mr.c_n;
      doc["d_n"] = mr.d_n;
    } else if (*cmd_optprobs) {
      if (opt_table) {
        doc["table"] = table3_json(9);
      } else {
        if (opt_t <= 0) {
          throw bandsis::error("optprobs requires --t or --table");
        }
        bandsis::OptProbs probs = bandsis::solve_opt_probs(opt_t);
        doc["t"] = probs.t;
        doc["p"] = probs.p;
        doc["residual_recurrence"] = probs.residual_recurrence;
        doc["residual_terminal"] = probs.residual_terminal;
      }
    } else if (*cmd_tables) {
      if (which == "1") {
        json rows = json::array();
        for (const auto& row : bandsis::table1(bandsis::table1_pairs(), n_big)) {
          rows.push_back(json{{"s", row.s}, {"t", row.t}, {"c", row.c}, {"d", row.d}});
        }
        doc["table"] = std::move(rows);
        doc["n_big"] = n_big;
      } else if (which == "2") {
        json rows = json::array();
        bandsis::SampleSizeTable tab =
            bandsis::table2(bandsis::table1_pairs(), {100, 200, 500, 1000, 2000, 5000});
        for (const auto& row : tab.rows) {
          rows.push_back(json{{"s", row.s},
                              {"t", row.t},
                              {"n", row.n},
                              {"log_n_conv_times_n", row.predicted},
                              {"log_mcmc", row.mcmc}});
        }
        doc["table"] = std::move(rows);
      } else if (which == "3") {
        doc["table"] = table3_json(9);
      } else {  // mcmc
        json rows = json::array();
        for (int nn : {100, 200, 500, 1000, 2000, 5000}) {
          rows.push_back(json{{"n", nn}, {"log_mcmc", bandsis::mcmc_reference(nn)}});
        }
        doc["table"] = std::move(rows);
      }
    } else if (*cmd_clt) {
      bandsis::CLTReport rep = bandsis::clt_check({s, t, n}, n_samples, seed, workers);
      doc = spec_json(rep.spec);
      doc["n_samples"] = rep.n_samples;
      doc["e_theta"] = rep.e_theta;
      doc["sd_theta"] = rep.sd_theta;
      doc["sample_mean"] = rep.sample_mean;
      doc["sample_var"] = rep.sample_var;
      doc["ks_statistic"] = rep.ks_statistic;
      doc["ks_midpoint"] = rep.ks_midpoint;
      doc["ks_lattice_floor"] = rep.ks_lattice_floor;
    } else if (*cmd_diag) {
      if (diag_kind == "corr") {
        bandsis::CorrelationReport rep = bandsis::max_correlation(bandsis::BandSpec{s, t, n});
        doc = spec_json(rep.spec);
        doc["max_rho"] = rep.max_rho;
        doc["min_gap"] = rep.min_gap;
        doc["epsilon_kernel"] = rep.epsilon_kernel;
        doc["rho"] = rep.rho;
      } else if (diag_kind == "coupling") {
        bandsis::CouplingReport rep =
            bandsis::coupling_time_test({s, t, n}, trials, seed);
        doc = spec_json(rep.spec);
        doc["trials"] = rep.trials;
        doc["mean_sq_gap"] = rep.mean_sq_gap;
        doc["epsilon_kernel"] = rep.epsilon_kernel;
        doc["bound"] = rep.bound;
        doc["max_gap"] = rep.max_gap;
      } else if (diag_kind == "states") {
        bandsis::StateSpace ss(s, t);
        doc["s"] = s;
        doc["t"] = t;
        doc["size"] = ss.size();
        json states = json::array();
        for (int i = 0; i < ss.size(); ++i) {
          states.push_back(ss.state(i).to_string());
        }
        doc["states"] = std::move(states);
        bandsis::SpectralData sd = bandsis::perron(s, t);
        doc["lambda"] = sd.lambda;
        doc["spectral_gap"] = sd.gap;
      } else if (diag_kind == "naive") {
        bandsis::NaiveVarianceComparison rep =
            bandsis::naive_variance_comparison({s, t, n});
        doc = spec_json(rep.spec);
        doc["chi_sq"] = rep.chi_sq;
        doc["log_n_naive"] = rep.log_n_naive;
        doc["log_n_el"] = rep.log_n_el;
      } else if (diag_kind == "crossover") {
        bandsis::CrossoverReport rep = bandsis::crossover_N_star(s, t);
        doc["s"] = rep.s;
        doc["t"] = rep.t;
        doc["n_star"] = rep.n_star;
        doc["predicted_at_star"] = rep.predicted_at_star;
        doc["mcmc_at_star"] = rep.mcmc_at_star;
      } else if (diag_kind == "conjecture") {
        json rows = json::array();
        for (const auto& row : bandsis::conjecture_experiment(s, t, n)) {
          rows.push_back(json{{"n", row.n},
                              {"max_ratio", row.max_ratio},
                              {"min_ratio", row.min_ratio}});
        }
        doc["s"] = s;
        doc["t"] = t;
        doc["table"] = std::move(rows);
      } else {  // required
        bandsis::RequiredSamples rep = bandsis::required_samples({s, t, n});
        doc = spec_json(rep.spec);
        doc["e_log_rho"] = rep.e_log_rho;
        doc["sd_log_rho"] = rep.sd_log_rho;
        doc["log_n_conv"] = rep.log_n_conv;
      }
    }
    print_doc(doc, format);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
