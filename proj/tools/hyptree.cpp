// hyptree: phylogenetic inference by gradient ascent on point configurations
// in the hyperboloid model, with simulation, embedding, delta-hyperbolicity
// diagnostics and a desk-scale evaluation harness.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hyptree/hyptree.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hyptree;

namespace {

constexpr int k_exit_ok = 0;
constexpr int k_exit_usage = 1;
constexpr int k_exit_data = 2;
constexpr int k_exit_no_convergence = 3;

int dispatch(const std::vector<std::string>& args);

std::string iso_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const std::vector<std::string>& argv, std::uint64_t seed,
                    const json& parameters, const json& inputs, const json& outputs) {
  json manifest;
  manifest["command"] = command;
  manifest["argv"] = argv;
  manifest["seed"] = seed;
  manifest["parameters"] = parameters;
  manifest["inputs"] = inputs;
  manifest["outputs"] = outputs;
  manifest["tool_version"] = k_version;
  manifest["timestamp"] = iso_timestamp();
  std::ofstream out(out_dir / "manifest.json");
  if (!out) throw std::runtime_error("cannot write manifest in " + out_dir.string());
  out << manifest.dump(2) << '\n';
}

struct OptimizerFlags {
  double lr = 0.1;
  double max_step = 0.05;
  double conv_threshold = 5e-5;
  int max_iters = 10000;
  int trace_every = 10;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--lr", lr, "learning rate");
    cmd->add_option("--max-step", max_step, "maximum step length per update");
    cmd->add_option("--conv-threshold", conv_threshold,
                    "convergence threshold on the largest per-sweep step");
    cmd->add_option("--max-iters", max_iters, "maximum number of sweeps");
    cmd->add_option("--trace-every", trace_every, "sweeps between trace records");
  }

  OptimizerSettings settings() const {
    OptimizerSettings s;
    s.learning_rate = lr;
    s.max_step = max_step;
    s.convergence_threshold = conv_threshold;
    s.max_iterations = max_iters;
    s.trace_every = trace_every;
    return s;
  }

  json to_json() const {
    return {{"learning_rate", lr},
            {"max_step", max_step},
            {"convergence_threshold", conv_threshold},
            {"max_iterations", max_iters},
            {"trace_every", trace_every}};
  }
};

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(int n_leaves, long length, double lo, double hi, std::uint64_t seed,
                 const fs::path& out_dir, const std::vector<std::string>& argv) {
  fs::create_directories(out_dir);
  Tree tree = random_topology(n_leaves, mix_seed(seed, 1));
  tree = sample_edge_lengths(tree, lo, hi, mix_seed(seed, 2));
  const Alignment a = simulate_alignment(tree, length, mix_seed(seed, 3));

  write_newick_file((out_dir / "tree.nwk").string(), tree);
  write_fasta_file((out_dir / "alignment.fasta").string(), a);
  write_manifest(out_dir, "simulate", argv, seed,
                 {{"leaves", n_leaves}, {"length", length}, {"lo", lo}, {"hi", hi}},
                 json::object(),
                 {{"tree", "tree.nwk"}, {"alignment", "alignment.fasta"}});
  return k_exit_ok;
}

// ---------------------------------------------------------------------------
// infer

void report_problem_pairs(const Alignment& a, const DiffRateMatrix& stats) {
  for (int i = 0; i < stats.n; ++i)
    for (int j = i + 1; j < stats.n; ++j) {
      if (stats.rates(i, j) >= 0.75)
        std::cerr << "warning: saturated pair (" << a.taxa[i] << ", " << a.taxa[j]
                  << "): rate " << stats.rates(i, j) << " >= 3/4, distance capped\n";
      else if (stats.rates(i, j) == 0.0)
        std::cerr << "warning: identical sequences (" << a.taxa[i] << ", "
                  << a.taxa[j] << ")\n";
    }
}

int cmd_infer(const std::string& alignment_path, double rho, int dim,
              const OptimizerFlags& flags, std::uint64_t seed,
              const std::string& reference_path, bool trace_loglik,
              const fs::path& out_dir, const std::vector<std::string>& argv) {
  fs::create_directories(out_dir);
  const Alignment a = read_fasta_file(alignment_path);
  if (a.size() < 3) throw std::invalid_argument("infer: need at least 3 taxa");
  const DiffRateMatrix stats = diff_rates(a);
  report_problem_pairs(a, stats);

  const DistanceMatrix ml_dm = ml_distance_matrix(stats, a.taxa);
  const Tree guide = midpoint_root(neighbor_joining(ml_dm));
  const PointConfiguration initial = reorder_configuration(
      embed_tree(guide, EmbeddingConfig{dim, rho, mix_seed(seed, 4)}), a.taxa);

  std::optional<Tree> reference;
  if (!reference_path.empty()) reference = read_newick_file(reference_path);

  std::ofstream trace_out(out_dir / "trace.jsonl");
  if (!trace_out) throw std::runtime_error("cannot write trace in " + out_dir.string());
  TraceOptions tracing;
  if (reference) tracing.reference_tree = &*reference;
  if (trace_loglik) tracing.alignment = &a;
  tracing.sink = [&](const TraceRecord& rec) { write_trace_record(trace_out, rec); };

  const OptimizeResult res = optimize(initial, stats, flags.settings(), &tracing);
  trace_out.close();
  if (!res.converged)
    std::cerr << "warning: optimizer did not converge within " << flags.max_iters
              << " sweeps (largest step still above threshold)\n";

  const DistanceMatrix final_dm = config_distances(res.config);
  const Tree inferred = neighbor_joining(final_dm);

  write_newick_file((out_dir / "inferred.nwk").string(), inferred);
  write_file((out_dir / "distances.csv").string(),
             [&](std::ostream& o) { write_distance_csv(o, final_dm); });
  write_file((out_dir / "config.csv").string(),
             [&](std::ostream& o) { write_config_csv(o, res.config); });

  json params = flags.to_json();
  params["rho"] = rho;
  params["dim"] = dim;
  params["trace_loglik"] = trace_loglik;
  json inputs = {{"alignment", alignment_path}};
  if (!reference_path.empty()) inputs["reference"] = reference_path;
  json outputs = {{"tree", "inferred.nwk"},
                  {"distances", "distances.csv"},
                  {"configuration", "config.csv"},
                  {"trace", "trace.jsonl"}};
  outputs["converged"] = res.converged;
  outputs["sweeps"] = res.sweeps;
  write_manifest(out_dir, "infer", argv, seed, params, inputs, outputs);
  return res.converged ? k_exit_ok : k_exit_no_convergence;
}

// ---------------------------------------------------------------------------
// embed

int cmd_embed(const std::string& tree_path, double rho, int dim, std::uint64_t seed,
              const fs::path& out_dir, const std::vector<std::string>& argv) {
  fs::create_directories(out_dir);
  Tree tree = read_newick_file(tree_path);
  if (!tree.rooted) tree = midpoint_root(tree);
  const PointConfiguration config =
      embed_tree(tree, EmbeddingConfig{dim, rho, mix_seed(seed, 5)});

  write_file((out_dir / "config.csv").string(),
             [&](std::ostream& o) { write_config_csv(o, config); });
  json outputs = {{"configuration", "config.csv"}};
  if (dim == 2) {
    write_file((out_dir / "poincare.csv").string(),
               [&](std::ostream& o) { write_poincare_csv(o, config); });
    outputs["poincare"] = "poincare.csv";
  }
  write_manifest(out_dir, "embed", argv, seed, {{"rho", rho}, {"dim", dim}},
                 {{"tree", tree_path}}, outputs);
  return k_exit_ok;
}

// ---------------------------------------------------------------------------
// fourpoint

int cmd_fourpoint(const std::string& input_path, long n_samples, std::uint64_t seed,
                  const fs::path& out_dir, const std::vector<std::string>& argv) {
  fs::create_directories(out_dir);
  std::ifstream in(input_path);
  if (!in) throw std::runtime_error("cannot open input: " + input_path);
  std::string header;
  std::getline(in, header);
  in.seekg(0);

  std::vector<std::string> labels;
  DeltaSample best;
  std::optional<double> bound;
  if (header.rfind("label,rho,x1", 0) == 0) {
    const PointConfiguration config = read_config_csv(in);
    labels = config.labels;
    best = sampled_delta_report(config, n_samples, seed);
    if (config.dim() == 2) bound = config.rho() * std::log(2.0);
  } else {
    const DistanceMatrix dm = read_distance_csv(in);
    labels = dm.labels;
    best = sampled_delta_report(dm.d, n_samples, seed);
  }

  json report;
  report["delta"] = best.delta;
  report["quadruple"] = {labels[best.quad[0]], labels[best.quad[1]],
                         labels[best.quad[2]], labels[best.quad[3]]};
  std::cout << "max sampled four-point delta: " << best.delta << '\n';
  std::cout << "attained by quadruple: " << labels[best.quad[0]] << ", "
            << labels[best.quad[1]] << ", " << labels[best.quad[2]] << ", "
            << labels[best.quad[3]] << '\n';
  if (bound) {
    report["bound_rho_ln2"] = *bound;
    std::cout << "theoretical bound rho*ln(2) for m=2: " << *bound << '\n';
  }

  write_file((out_dir / "report.json").string(),
             [&](std::ostream& o) { o << report.dump(2) << '\n'; });
  write_manifest(out_dir, "fourpoint", argv, seed, {{"samples", n_samples}},
                 {{"input", input_path}}, {{"report", "report.json"}});
  return k_exit_ok;
}

// ---------------------------------------------------------------------------
// study

struct StudyParams {
  std::string kind;
  std::vector<double> grid;
  int trees = 0;
  int replicates = 0;
  long fixed_length = 200;
  int fixed_leaves = 30;
  double rho = 0.5;
  int dim = 30;
  OptimizerFlags flags;
  std::uint64_t seed = 0;
};

StudyRow score_method(const std::string& method, const Tree& inferred,
                      const Tree& generating, const Alignment& a,
                      double loglik_generating, double wall_time_s) {
  StudyRow row;
  row.method = method;
  row.rf_distance = rf_distance(inferred, generating);
  row.topology_match = row.rf_distance == 0;
  row.loglik_inferred = optimize_branch_lengths(inferred, a).loglik;
  row.loglik_generating = loglik_generating;
  row.loglik_success = row.loglik_inferred >= row.loglik_generating;
  row.wall_time_s = wall_time_s;
  return row;
}

int cmd_study(const StudyParams& sp, const fs::path& out_dir,
              const std::vector<std::string>& argv) {
  fs::create_directories(out_dir);
  std::ofstream csv(out_dir / "study.csv");
  if (!csv) throw std::runtime_error("cannot write study.csv in " + out_dir.string());
  csv << k_study_csv_header << '\n';

  using clock = std::chrono::steady_clock;
  for (std::size_t gi = 0; gi < sp.grid.size(); ++gi) {
    const double g = sp.grid[gi];
    const int n = sp.kind == "taxa" ? static_cast<int>(g) : sp.fixed_leaves;
    const long L = sp.kind == "length" ? static_cast<long>(g) : sp.fixed_length;
    for (int tree_id = 0; tree_id < sp.trees; ++tree_id) {
      Tree generating = random_topology(n, mix_seed(sp.seed, gi, tree_id, 11));
      generating =
          sample_edge_lengths(generating, 0.05, 0.2, mix_seed(sp.seed, gi, tree_id, 12));
      for (int rep = 0; rep < sp.replicates; ++rep) {
        StudyRow base;
        base.kind = sp.kind;
        base.grid_value = g;
        base.tree_id = tree_id;
        base.replicate = rep;
        try {
          const Alignment a =
              simulate_alignment(generating, L, mix_seed(sp.seed, gi, tree_id, rep, 13));
          const double loglik_generating = optimize_branch_lengths(generating, a).loglik;
          const DiffRateMatrix stats = diff_rates(a);
          const DistanceMatrix ml_dm = ml_distance_matrix(stats, a.taxa);

          {
            const auto t0 = clock::now();
            const Tree nj = neighbor_joining(ml_dm);
            const double wall = std::chrono::duration<double>(clock::now() - t0).count();
            StudyRow row = score_method("nj", nj, generating, a, loglik_generating, wall);
            row.kind = base.kind;
            row.grid_value = base.grid_value;
            row.tree_id = base.tree_id;
            row.replicate = base.replicate;
            write_study_row(csv, row);
          }
          {
            const auto t0 = clock::now();
            const Tree guide = midpoint_root(neighbor_joining(ml_dm));
            const PointConfiguration initial = reorder_configuration(
                embed_tree(guide, EmbeddingConfig{sp.dim, sp.rho,
                                                  mix_seed(sp.seed, gi, tree_id, rep, 14)}),
                a.taxa);
            const OptimizeResult res = optimize(initial, stats, sp.flags.settings());
            const Tree inferred = neighbor_joining(config_distances(res.config));
            const double wall = std::chrono::duration<double>(clock::now() - t0).count();
            StudyRow row =
                score_method("hyperbolic", inferred, generating, a, loglik_generating, wall);
            row.kind = base.kind;
            row.grid_value = base.grid_value;
            row.tree_id = base.tree_id;
            row.replicate = base.replicate;
            if (!res.converged) row.status = "no-convergence";
            write_study_row(csv, row);
          }
        } catch (const std::exception& e) {
          base.method = "error";
          base.rf_distance = -1;
          base.loglik_inferred = std::nan("");
          base.loglik_generating = std::nan("");
          base.status = e.what();
          write_study_row(csv, base);
        }
      }
    }
  }
  csv.close();

  json params = sp.flags.to_json();
  params["kind"] = sp.kind;
  params["grid"] = sp.grid;
  params["trees"] = sp.trees;
  params["replicates"] = sp.replicates;
  params["length"] = sp.fixed_length;
  params["leaves"] = sp.fixed_leaves;
  params["rho"] = sp.rho;
  params["dim"] = sp.dim;
  write_manifest(out_dir, "study", argv, sp.seed, params, json::object(),
                 {{"results", "study.csv"}});
  return k_exit_ok;
}

// ---------------------------------------------------------------------------
// rerun

int cmd_rerun(const std::string& manifest_path, const std::string& out_override) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open manifest: " + manifest_path);
  json manifest;
  in >> manifest;
  std::vector<std::string> args = manifest.at("argv").get<std::vector<std::string>>();
  if (!out_override.empty()) {
    bool replaced = false;
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
      if (args[i] == "--out") {
        args[i + 1] = out_override;
        replaced = true;
      }
    if (!replaced) {
      args.push_back("--out");
      args.push_back(out_override);
    }
  }
  return dispatch(args);
}

// ---------------------------------------------------------------------------

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"phylogenetic inference on the hyperboloid model"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate a random tree and alignment");
  int sim_leaves = 0;
  long sim_length = 0;
  double sim_lo = 0.05, sim_hi = 0.2;
  std::uint64_t sim_seed = 0;
  std::string sim_out;
  sim->add_option("--leaves", sim_leaves, "number of taxa")->required();
  sim->add_option("--length", sim_length, "sequence length")->required();
  sim->add_option("--lo", sim_lo, "edge length lower bound");
  sim->add_option("--hi", sim_hi, "edge length upper bound");
  sim->add_option("--seed", sim_seed, "random seed");
  sim->add_option("--out", sim_out, "output directory")->required();

  // infer
  auto* inf = app.add_subcommand("infer", "infer a tree from an alignment");
  std::string inf_alignment, inf_reference, inf_out;
  double inf_rho = 0.5;
  int inf_dim = 30;
  std::uint64_t inf_seed = 0;
  bool inf_trace_loglik = false;
  OptimizerFlags inf_flags;
  inf->add_option("--alignment", inf_alignment, "FASTA alignment")->required();
  inf->add_option("--rho", inf_rho, "hyperboloid radius");
  inf->add_option("--dim", inf_dim, "hyperboloid dimension");
  inf->add_option("--seed", inf_seed, "random seed");
  inf->add_option("--reference", inf_reference,
                  "reference tree; trace records then include the RF distance");
  inf->add_flag("--trace-loglik", inf_trace_loglik,
                "tune branch lengths at every trace point and record the tree "
                "log-likelihood (slow)");
  inf_flags.add_to(inf);
  inf->add_option("--out", inf_out, "output directory")->required();

  // embed
  auto* emb = app.add_subcommand("embed", "embed a tree on the hyperboloid");
  std::string emb_tree, emb_out;
  double emb_rho = 1.0;
  int emb_dim = 2;
  std::uint64_t emb_seed = 0;
  emb->add_option("--tree", emb_tree, "Newick tree")->required();
  emb->add_option("--rho", emb_rho, "hyperboloid radius");
  emb->add_option("--dim", emb_dim, "hyperboloid dimension");
  emb->add_option("--seed", emb_seed, "random seed");
  emb->add_option("--out", emb_out, "output directory")->required();

  // fourpoint
  auto* fp = app.add_subcommand("fourpoint", "four-point condition diagnostics");
  std::string fp_input, fp_out;
  long fp_samples = 10000;
  std::uint64_t fp_seed = 0;
  fp->add_option("--input", fp_input, "configuration CSV or distance CSV")->required();
  fp->add_option("--samples", fp_samples, "number of sampled quadruples");
  fp->add_option("--seed", fp_seed, "random seed");
  fp->add_option("--out", fp_out, "output directory")->required();

  // study
  auto* st = app.add_subcommand("study", "simulation study over a parameter grid");
  StudyParams sp;
  std::string st_out;
  st->add_option("--kind", sp.kind, "grid dimension: taxa | length")
      ->required()
      ->check(CLI::IsMember({"taxa", "length"}));
  st->add_option("--grid", sp.grid, "grid values (taxon counts or lengths)");
  st->add_option("--trees", sp.trees, "trees per grid point (default 10 taxa / 8 length)");
  st->add_option("--replicates", sp.replicates,
                 "alignments per tree (default 4 taxa / 12 length)");
  st->add_option("--length", sp.fixed_length, "sequence length for the taxa study");
  st->add_option("--leaves", sp.fixed_leaves, "taxon count for the length study");
  st->add_option("--rho", sp.rho, "hyperboloid radius");
  st->add_option("--dim", sp.dim, "hyperboloid dimension");
  st->add_option("--seed", sp.seed, "random seed");
  sp.flags.add_to(st);
  st->add_option("--out", st_out, "output directory")->required();

  // rerun
  auto* rr = app.add_subcommand("rerun", "re-execute a run from its manifest");
  std::string rr_manifest, rr_out;
  rr->add_option("--manifest", rr_manifest, "manifest.json of a previous run")->required();
  rr->add_option("--out", rr_out, "override the output directory");

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? k_exit_ok : k_exit_usage;
  }

  if (sim->parsed())
    return cmd_simulate(sim_leaves, sim_length, sim_lo, sim_hi, sim_seed, sim_out, args);
  if (inf->parsed())
    return cmd_infer(inf_alignment, inf_rho, inf_dim, inf_flags, inf_seed, inf_reference,
                     inf_trace_loglik, inf_out, args);
  if (emb->parsed()) return cmd_embed(emb_tree, emb_rho, emb_dim, emb_seed, emb_out, args);
  if (fp->parsed()) return cmd_fourpoint(fp_input, fp_samples, fp_seed, fp_out, args);
  if (st->parsed()) {
    if (sp.grid.empty()) sp.grid = sp.kind == "taxa" ? std::vector<double>{5, 10, 20}
                                                     : std::vector<double>{100, 250, 500, 750};
    if (sp.trees == 0) sp.trees = sp.kind == "taxa" ? 10 : 8;
    if (sp.replicates == 0 && !st->count("--replicates"))
      sp.replicates = sp.kind == "taxa" ? 4 : 12;
    return cmd_study(sp, st_out, args);
  }
  if (rr->parsed()) return cmd_rerun(rr_manifest, rr_out);
  return k_exit_usage;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return dispatch(args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return k_exit_data;
  }
}
