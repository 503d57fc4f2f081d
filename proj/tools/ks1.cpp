#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI/CLI.hpp>
#include "ks1/harness.hpp"
#include "ks1/io.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 2;
constexpr int kThresholds = 3;

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ks1::InputError("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ks1::InputError("cannot write " + path);
  return out;
}

struct GenerateArgs {
  std::size_t n = 0;
  double deg4_frac = 0.0;
  std::string degrees;
  std::uint64_t seed = 1;
  std::string out;
};

int generate(const GenerateArgs& a) {
  ks1::DegreeSequence d;
  if (!a.degrees.empty()) {
    auto in = open_in(a.degrees);
    d = ks1::io::read_degree_sequence(in);
  } else {
    const auto mixed = ks1::mixed_degree_sequence(a.n, a.deg4_frac);
    if (mixed.adjusted)
      std::cerr << "degree sum was odd; using " << mixed.fours << " vertices of degree 4\n";
    d = mixed.degrees;
  }
  ks1::Rng rng(a.seed);
  const auto sample = ks1::sample_no_loops(d, rng);
  std::cerr << "sampled " << d.size() << " vertices, " << sample.pairs.size() << " edges after " << sample.retries
            << " rejected draws\n";
  if (a.out.empty() || a.out == "-") {
    ks1::io::write_edge_list(std::cout, d.size(), sample.pairs);
  } else {
    auto out = open_out(a.out);
    ks1::io::write_edge_list(out, d.size(), sample.pairs);
  }
  return kOk;
}

struct RunArgs {
  std::string in;
  std::string mode = "full";
  std::size_t omega = 0;
  std::uint64_t seed = 1;
  std::string matching_out;
  std::string trace_out;
};

int run(const RunArgs& a) {
  auto in = open_in(a.in);
  const auto edges = ks1::io::read_edge_list(in);
  const auto g0 = ks1::MultiGraph::build(edges.n, edges.edges);
  ks1::Rng rng(a.seed);
  const auto mode = a.mode == "hybrid" ? ks1::Mode::Hybrid : ks1::Mode::Full;
  const auto res = ks1::run_pipeline(g0, edges.edges, rng, mode, a.omega);
  std::cout << "n=" << edges.n << " m=" << edges.edges.size() << " matched=" << res.pairs.size()
            << " kappa=" << res.kappa << " R0=" << res.ledger.r0 << " R2b=" << res.ledger.r2b
            << " actions=" << res.trace.actions.size() << " stop=" << ks1::to_string(res.trace.stop);
  if (res.kappa_h) std::cout << " stop_n=" << res.stop_vertices << " kappa_h=" << *res.kappa_h;
  std::cout << '\n';
  if (!a.matching_out.empty()) {
    auto out = open_out(a.matching_out);
    ks1::io::write_matching(out, res.pairs, res.kappa, res.ledger.r0, res.ledger.r2b);
  }
  if (!a.trace_out.empty()) {
    auto out = open_out(a.trace_out);
    ks1::write_trace(out, res.trace);
  }
  return res.anomaly ? kThresholds : kOk;
}

struct ExperimentArgs {
  std::string kind;
  ks1::ExperimentOptions opts;
  std::string json;
  std::string csv;
};

int experiment(ExperimentArgs a) {
  ks1::ExperimentReport report;
  if (a.kind == "deficit") report = ks1::exp_deficit(a.opts);
  else if (a.kind == "hybrid") report = ks1::exp_hybrid(a.opts);
  else if (a.kind == "oracle") report = ks1::exp_oracle(a.opts);
  else if (a.kind == "drift") report = ks1::exp_drift(a.opts);
  else {
    if (a.opts.sizes.empty()) a.opts.sizes = {a.opts.n, 4 * a.opts.n};
    report = ks1::exp_scaling(a.opts);
  }
  const auto j = ks1::to_json(report);
  if (!a.json.empty()) {
    auto out = open_out(a.json);
    out << j.dump(2) << '\n';
  }
  if (!a.csv.empty()) {
    auto out = open_out(a.csv);
    ks1::write_histogram_csv(out, ks1::pooled_histogram(report));
  }
  std::cout << report.experiment << ": " << j["aggregates"].dump() << '\n'
            << "thresholds " << (report.thresholds_met ? "met" : "NOT met") << '\n';
  return report.thresholds_met ? kOk : kThresholds;
}

struct VerifyArgs {
  std::string in;
  std::string matching;
};

int verify(const VerifyArgs& a) {
  auto in = open_in(a.in);
  const auto edges = ks1::io::read_edge_list(in);
  auto min = open_in(a.matching);
  const auto m = ks1::io::read_matching(min);
  std::string why;
  if (!ks1::is_matching_of(edges.n, edges.edges, m.pairs, &why)) {
    std::cout << "invalid: " << why << '\n';
    return kInvalid;
  }
  const std::size_t kappa = edges.n - 2 * m.pairs.size();
  std::size_t claimed = 0;
  std::istringstream hs(m.header);
  std::string field;
  while (hs >> field)
    if (field.rfind("kappa=", 0) == 0) {
      claimed = std::stoull(field.substr(6));
      if (claimed != kappa) {
        std::cout << "invalid: header kappa " << claimed << " but matching leaves " << kappa << " uncovered\n";
        return kInvalid;
      }
    }
  std::cout << "valid: " << m.pairs.size() << " edges, kappa=" << kappa << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Degree-reduction matching on random {3,4}-degree multigraphs"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "sample a loop-free configuration-model multigraph");
  g->add_option("--n", gen.n, "number of vertices");
  g->add_option("--deg4-frac", gen.deg4_frac, "fraction of degree-4 vertices")->check(CLI::Range(0.0, 1.0));
  g->add_option("--degrees", gen.degrees, "degree sequence file (one degree per line)")->excludes("--n");
  g->add_option("--seed", gen.seed, "random seed");
  g->add_option("--out", gen.out, "edge list output (default stdout)");

  RunArgs runa;
  auto* r = app.add_subcommand("run", "run REDUCE and CONSTRUCT on an edge list");
  r->add_option("--in", runa.in, "edge list")->required();
  r->add_option("--mode", runa.mode, "full or hybrid")->check(CLI::IsMember({"full", "hybrid"}));
  r->add_option("--omega", runa.omega, "hybrid snapshot window (default ceil(n^(2/3)))");
  r->add_option("--seed", runa.seed, "random seed");
  r->add_option("--matching-out", runa.matching_out, "write the matching here");
  r->add_option("--trace-out", runa.trace_out, "write the action trace here");

  ExperimentArgs ex;
  auto* e = app.add_subcommand("experiment", "seeded multi-trial experiment");
  e->add_option("kind", ex.kind, "deficit, hybrid, oracle, scaling or drift")
      ->required()
      ->check(CLI::IsMember({"deficit", "hybrid", "oracle", "scaling", "drift"}));
  e->add_option("--n", ex.opts.n, "number of vertices");
  e->add_option("--trials", ex.opts.trials, "number of trials");
  e->add_option("--seed", ex.opts.seed, "master seed");
  e->add_option("--deg4-frac", ex.opts.deg4_frac, "fraction of degree-4 vertices")->check(CLI::Range(0.0, 1.0));
  e->add_option("--omega", ex.opts.omega, "hybrid snapshot window");
  e->add_option("--sizes", ex.opts.sizes, "scaling sizes, ascending");
  e->add_option("--threads", ex.opts.threads, "worker threads");
  e->add_option("--json", ex.json, "report output");
  e->add_option("--csv", ex.csv, "hyperaction histogram output (drift)");

  VerifyArgs ver;
  auto* v = app.add_subcommand("verify", "check a matching file against an edge list");
  v->add_option("--in", ver.in, "edge list")->required();
  v->add_option("--matching", ver.matching, "matching file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& s) {
    return app.exit(s);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return kInvalid;
  }

  try {
    if (*g) return generate(gen);
    if (*r) return run(runa);
    if (*e) return experiment(ex);
    return verify(ver);
  } catch (const ks1::InputError& err) {
    std::cerr << "input error: " << err.what() << '\n';
    return kInvalid;
  } catch (const ks1::IntegrityError& err) {
    std::cerr << "integrity error: " << err.what() << '\n';
    return kInvalid;
  } catch (const ks1::RetriesExhausted& err) {
    std::cerr << err.what() << '\n';
    return kInvalid;
  }
}
