#include "edgeroute/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>

#include "edgeroute/graph.hpp"
#include "edgeroute/sim.hpp"
#include "edgeroute/sssp.hpp"

namespace edgeroute {
namespace {

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const auto m = xs.size() / 2;
  return xs.size() % 2 ? xs[m] : (xs[m - 1] + xs[m]) / 2.0;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

CityGraph read_graph_arg(const std::string& path) {
  if (!std::filesystem::exists(path)) throw ValidationError("no such file: " + path);
  return load_graph_file(path);
}

std::string dist_text(Cost d) { return d == kInfinity ? "inf" : format_milli(d); }

struct GenArgs {
  NodeId n = 10;
  double density = 0.3;
  std::uint64_t seed = 1;
  std::vector<std::string> services{"fire=1", "medical=1", "police=1"};
  double surveillance = 0.5;
  std::string output;
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
  CityOptions opt;
  opt.n = a.n;
  opt.density = a.density;
  opt.seed = a.seed;
  opt.surveillance_fraction = a.surveillance;
  for (const auto& s : a.services) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("service must be type=count: " + s);
    int count = 0;
    try {
      count = std::stoi(s.substr(eq + 1));
    } catch (const std::exception&) {
      throw ValidationError("service must be type=count: " + s);
    }
    opt.service_counts[s.substr(0, eq)] += count;
  }
  const auto text = to_graph_text(generate_city(opt));
  if (a.output.empty() || a.output == "-")
    out << text;
  else
    write_file(a.output, text);
  return kExitOk;
}

struct RouteArgs {
  std::string graph;
  NodeId source = 0;
  int workers = 4;
  bool json = false;
};

int cmd_route(const RouteArgs& a, std::ostream& out) {
  const auto g = read_graph_arg(a.graph);
  if (!g.valid_node(a.source)) throw ValidationError("invalid source " + std::to_string(a.source));
  if (a.workers < 1) throw ValidationError("p must be at least 1");
  const int p = std::min<int>(a.workers, g.size());
  const auto seq = dijkstra_sequential(g, a.source);
  const auto par = dijkstra_parallel(g, a.source, p);
  const bool agree = seq.dist == par.dist && seq.settle_order == par.settle_order && seq.pred == par.pred;
  const auto ranked = rank_services(par, g, g.service_types());

  if (a.json) {
    Json j;
    j["source"] = a.source;
    j["workers"] = p;
    j["graph_version"] = g.version();
    Json dist = Json::array();
    for (const Cost d : par.dist) dist.push_back(d == kInfinity ? Json(nullptr) : Json(d));
    j["dist"] = std::move(dist);
    j["pred"] = par.pred;
    Json rank = Json::array();
    for (const auto& r : ranked)
      rank.push_back({{"service_type", r.service_type}, {"node", r.node}, {"cost", r.cost}, {"path", r.path}});
    j["ranking"] = std::move(rank);
    j["agreement"] = agree;
    out << j.dump(2) << '\n';
    return kExitOk;
  }

  out << "source " << a.source << "  nodes " << g.size() << "  workers " << p << "  graph version " << g.version()
      << "\n\n";
  out << std::left << std::setw(6) << "node" << std::setw(18) << "role" << std::setw(12) << "distance"
      << "pred\n";
  for (NodeId v = 0; v < g.size(); ++v) {
    const auto pr = par.predecessor(v);
    out << std::left << std::setw(6) << v << std::setw(18) << to_string(g.role(v)) << std::setw(12)
        << dist_text(par.distance(v)) << (pr == kNoNode ? "-" : std::to_string(pr)) << '\n';
  }
  out << "\nranking\n";
  std::string type;
  int rank = 0;
  for (const auto& r : ranked) {
    if (r.service_type != type) {
      type = r.service_type;
      rank = 0;
    }
    out << "  " << std::left << std::setw(10) << r.service_type << ++rank << ". node " << r.node << "  cost "
        << format_milli(r.cost) << "  path";
    for (const NodeId v : r.path) out << ' ' << v;
    out << '\n';
  }
  out << "\nagreement " << (agree ? "true" : "false") << '\n';
  return agree ? kExitOk : kExitRuntime;
}

struct SimArgs {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string metrics;
  std::string trace;
  bool no_cache = false;
};

int cmd_simulate(const SimArgs& a, std::ostream& out) {
  if (!std::filesystem::exists(a.scenario)) throw ValidationError("no such file: " + a.scenario);
  const auto sc = load_scenario_file(a.scenario);
  SimOptions opt;
  opt.seed = a.seed;
  if (a.no_cache) opt.cache_enabled = false;
  const auto r = run_scenario(sc, opt);

  std::string trace;
  for (const auto& line : r.trace) trace += line + '\n';
  if (!a.trace.empty()) write_file(a.trace, trace);
  if (!a.metrics.empty()) write_file(a.metrics, r.metrics.dump(2) + '\n');

  const auto& m = r.metrics;
  out << "incidents " << m.at("incidents").size() << "  unserved " << m.at("unserved_incidents")
      << "  messages " << m.at("messages").at("sent") << " sent / " << m.at("messages").at("dropped")
      << " dropped  engine runs " << m.at("engine_runs").at("parallel") << " parallel / "
      << m.at("engine_runs").at("sequential") << " sequential  cache hits " << m.at("cache").at("hits") << '\n';
  for (const auto& inc : m.at("incidents")) {
    out << "  " << inc.at("id").get<std::string>() << "  at node " << inc.at("location") << "  failovers "
        << inc.at("failovers") << "  reroutes " << inc.at("reroutes");
    if (!inc.at("first_arrival").is_null())
      out << "  first arrival t=" << format_milli(inc.at("first_arrival").get<Cost>());
    if (inc.at("unserved").get<bool>()) out << "  UNSERVED";
    out << '\n';
  }
  return kExitOk;
}

struct VerifyArgs {
  int graphs = 200;
  NodeId max_n = 64;
  std::uint64_t seed = 1;
};

// Quick self-check: parallel vs sequential vs Bellman-Ford style relaxation.
int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  if (a.graphs < 1 || a.max_n < 2) throw ValidationError("need at least one graph with n >= 2");
  std::mt19937_64 rng(a.seed);
  std::size_t failures = 0;
  for (int k = 0; k < a.graphs; ++k) {
    CityOptions opt;
    opt.n = std::uniform_int_distribution<NodeId>(2, a.max_n)(rng);
    opt.density = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
    opt.seed = rng();
    const auto g = generate_city(opt);
    const NodeId s = std::uniform_int_distribution<NodeId>(0, g.size() - 1)(rng);
    const auto seq = dijkstra_sequential(g, s);
    std::vector<Cost> ref(static_cast<std::size_t>(g.size()), kInfinity);
    ref[static_cast<std::size_t>(s)] = 0;
    for (NodeId round = 1; round < g.size(); ++round)
      for (const auto& e : g.edges()) {
        auto& du = ref[static_cast<std::size_t>(e.u)];
        auto& dv = ref[static_cast<std::size_t>(e.v)];
        if (du != kInfinity) dv = std::min(dv, du + e.weight);
        if (dv != kInfinity) du = std::min(du, dv + e.weight);
      }
    bool ok = seq.dist == ref;
    for (const int p : {2, 3, 7, static_cast<int>(g.size())}) {
      if (p > g.size()) continue;
      const auto par = dijkstra_parallel(g, s, p);
      ok = ok && par.dist == seq.dist && par.settle_order == seq.settle_order;
    }
    if (!ok) {
      ++failures;
      out << "mismatch on graph " << k << " (n=" << g.size() << ", seed=" << opt.seed << ")\n";
    }
  }
  out << "verified " << a.graphs << " graphs, " << failures << " failures\n";
  return failures == 0 ? kExitOk : kExitRuntime;
}

int cmd_bench(const BenchOptions& opt, std::ostream& out) {
  for (const NodeId n : opt.sizes)
    if (n < 2) throw ValidationError("sizes must be at least 2");
  for (const int p : opt.workers)
    if (p < 1) throw ValidationError("worker counts must be at least 1");
  if (opt.repetitions < 1) throw ValidationError("repetitions must be at least 1");
  const auto report = run_bench(opt);
  out << std::left << std::setw(8) << "n" << std::setw(12) << "engine" << std::setw(14) << "median ms"
      << "check\n";
  for (const auto& c : report.cells) {
    out << std::left << std::setw(8) << c.n << std::setw(12)
        << (c.workers == 0 ? std::string("seq") : "p=" + std::to_string(c.workers)) << std::setw(14) << std::fixed
        << std::setprecision(3) << c.median_ms << (c.correct ? "pass" : "FAIL") << '\n';
  }
  out << "correctness failures " << report.failures << '\n';
  return report.failures == 0 ? kExitOk : kExitRuntime;
}

}  // namespace

BenchReport run_bench(const BenchOptions& options) {
  BenchReport report;
  for (const NodeId n : options.sizes) {
    CityOptions city;
    city.n = n;
    city.density = options.density;
    city.seed = options.seed + static_cast<std::uint64_t>(n);
    const auto g = generate_city(city);
    const NodeId source = 0;

    std::vector<double> seq_ms;
    SsspResult reference;
    for (int r = 0; r < options.repetitions; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      reference = dijkstra_sequential(g, source);
      seq_ms.push_back(elapsed_ms(t0));
    }
    report.cells.push_back({n, 0, median(seq_ms), true});

    for (const int p : options.workers) {
      const int workers = std::min<int>(p, n);
      std::vector<double> ms;
      bool correct = true;
      for (int r = 0; r < options.repetitions; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto result = dijkstra_parallel(g, source, workers);
        ms.push_back(elapsed_ms(t0));
        correct = correct && result.dist == reference.dist && result.settle_order == reference.settle_order &&
                  result.pred == reference.pred;
      }
      report.cells.push_back({n, p, median(ms), correct});
      if (!correct) ++report.failures;
    }
  }
  return report;
}

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"edgeroute: edge-based emergency routing engine and simulator", "edgeroute"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a random connected city graph");
  g->add_option("--n", gen.n, "Number of vertices")->required();
  g->add_option("--density", gen.density, "Edge density in (0, 1]")->required();
  g->add_option("--seed", gen.seed, "Generator seed");
  g->add_option("--service", gen.services, "Service count as type=count (repeatable)");
  g->add_option("--surveillance", gen.surveillance, "Share of non-service vertices that are surveillance points");
  g->add_option("-o,--output", gen.output, "Output file (stdout if omitted)");

  RouteArgs route;
  auto* r = app.add_subcommand("route", "Shortest paths and service ranking from one source");
  r->add_option("graph", route.graph, "Graph file")->required();
  r->add_option("--source", route.source, "Source vertex")->required();
  r->add_option("-p,--workers", route.workers, "Parallel workers");
  r->add_flag("--json", route.json, "Machine-readable output");

  SimArgs sim;
  auto* s = app.add_subcommand("simulate", "Run a scenario through the discrete-event simulator");
  s->add_option("scenario", sim.scenario, "Scenario JSON file")->required();
  s->add_option("--seed", sim.seed, "Override the scenario seed");
  s->add_option("--metrics", sim.metrics, "Write metrics JSON here");
  s->add_option("--trace", sim.trace, "Write the trace log (JSON lines) here");
  s->add_flag("--no-cache", sim.no_cache, "Disable the path cache on every server");

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify", "Cross-check the engines on random graphs");
  v->add_option("--graphs", verify.graphs, "Number of random graphs");
  v->add_option("--max-n", verify.max_n, "Largest graph size");
  v->add_option("--seed", verify.seed, "Seed");

  BenchOptions bench;
  auto* b = app.add_subcommand("bench", "Time sequential and parallel engines");
  b->add_option("--sizes", bench.sizes, "Graph sizes")->delimiter(',');
  b->add_option("--workers", bench.workers, "Worker counts")->delimiter(',');
  b->add_option("--reps", bench.repetitions, "Repetitions per cell");
  b->add_option("--seed", bench.seed, "Seed");
  b->add_option("--density", bench.density, "Edge density");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (g->parsed()) return cmd_gen(gen, out);
    if (r->parsed()) return cmd_route(route, out);
    if (s->parsed()) return cmd_simulate(sim, out);
    if (v->parsed()) return cmd_verify(verify, out);
    if (b->parsed()) return cmd_bench(bench, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {  // ValidationError, ScenarioError
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace edgeroute
