// Command-line front end for the ittm library.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ittm/ittm.hpp"

namespace {

using namespace ittm;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::BadFormat, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error(ErrorKind::BadFormat, "cannot write " + out_path);
  out << text;
}

Machine load_machine(const std::string& path) { return expect(parse_machine(read_file(path)), path); }

std::size_t default_budget() {
  if (const char* env = std::getenv("ITTM_BUDGET")) {
    if (auto v = detail::parse_int<std::size_t>(env); v && *v > 0) return *v;
  }
  return 1000;
}

MatrixMode parse_mode(const std::string& s) {
  return s == "probabilities" ? MatrixMode::Probabilities : MatrixMode::Counts;
}

std::vector<OrdinalTime> layer_times(const std::vector<std::string>& given, std::size_t n) {
  std::vector<OrdinalTime> out;
  for (const auto& t : given) out.push_back(expect(parse_ordinal(t), "layer time"));
  // Default: w, w+1, w+2, ...
  for (std::size_t i = out.size(); i < n; ++i) out.push_back(OrdinalTime{1, i});
  out.resize(n);
  return out;
}

GraphLayerSequence load_layers(const std::vector<std::string>& paths, const std::vector<std::string>& times) {
  auto ts = layer_times(times, paths.size());
  std::vector<std::pair<OrdinalTime, StateGraph>> layers;
  for (std::size_t i = 0; i < paths.size(); ++i) layers.emplace_back(ts[i], parse_graph(read_file(paths[i])));
  return GraphLayerSequence(std::move(layers));
}

struct Options {
  std::string machine;
  std::string input;
  std::size_t budget = default_budget();
  std::string format = "human";
  std::string out;
  std::string trace;
  std::vector<std::size_t> schedule;
  std::size_t max_limits = 1;
  std::vector<std::string> files;
  std::vector<std::string> times;
  std::string start;
  std::size_t max_steps = 64;
  std::string mode = "counts";
  std::string provenance;
  std::string blank = "B";
  bool rules = false;
  bool greedy = false, replay_flag = false, layers = false;
  bool closed = false, mc = false;
  double epsilon = 0;
  std::uint64_t length = 0;
  std::uint64_t trials = 200000;
  std::uint64_t seed = 0;
  unsigned shards = 1;
  std::uint64_t tokens = 0, layer_count = 0;
  bool self_loops = false;
};

std::string run_summary(const Trace& t, const Options& o) {
  std::string text = format_trace(t);
  if (o.format == "human") {
    if (const auto* h = std::get_if<outcome::Halted>(&t.outcome)) {
      const auto& tape = h->final_config.tape;
      text += "final tape: " + (tape.all_blank() ? std::string("(blank)") : tape.slice(tape.min_position(), tape.max_position())) + "\n";
    }
  }
  return text;
}

Trace trace_for(const Options& o, const Machine& m) {
  if (!o.trace.empty()) return expect(parse_trace(read_file(o.trace), m), o.trace);
  return run(m, expect(parse_tape(o.input, m), "input"), o.budget);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Turing machine and transfinite-time workbench"};
  app.require_subcommand(1);
  Options o;

  auto add_machine = [&](CLI::App* sub, bool required = true) {
    auto* opt = sub->add_option("--machine,-m", o.machine, "machine description file");
    if (required) opt->required();
    sub->add_option("--input,-i", o.input, "input tape literal");
    sub->add_option("--budget,-b", o.budget, "step budget")->check(CLI::PositiveNumber);
  };
  auto add_out = [&](CLI::App* sub) { sub->add_option("--out,-o", o.out, "output file (default stdout)"); };
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", o.format, "human or machine")->check(CLI::IsMember({"human", "machine"}));
  };

  auto* run_cmd = app.add_subcommand("run", "run a machine and print its trace");
  add_machine(run_cmd);
  add_out(run_cmd);
  add_format(run_cmd);

  auto* limit_cmd = app.add_subcommand("limit", "limit configuration at w of a cycling run");
  add_machine(limit_cmd);
  add_out(limit_cmd);

  auto* trans_cmd = app.add_subcommand("transfinite", "run through limit ordinals");
  add_machine(trans_cmd);
  trans_cmd->add_option("--schedule", o.schedule, "per-stage step budgets")->delimiter(',');
  trans_cmd->add_option("--max-limits", o.max_limits, "number of limit stages");
  add_out(trans_cmd);
  add_format(trans_cmd);

  auto* halt_cmd = app.add_subcommand("halting", "decide halting at w (cycle-witnessed)");
  add_machine(halt_cmd);

  auto* graph_cmd = app.add_subcommand("graph", "build state graphs");
  graph_cmd->require_subcommand(1);
  auto* collapse_cmd = graph_cmd->add_subcommand("collapse", "collapsed machine state graph");
  auto* evolution_cmd = graph_cmd->add_subcommand("evolution", "evolution graph");
  for (auto* sub : {collapse_cmd, evolution_cmd}) {
    add_machine(sub);
    sub->add_option("--trace", o.trace, "trace file instead of running");
    add_out(sub);
  }
  auto* merge_cmd = graph_cmd->add_subcommand("merge", "merge graphs into a probabilistic graph");
  merge_cmd->add_option("graphs", o.files, "graph files")->required();
  add_out(merge_cmd);

  auto* route_cmd = app.add_subcommand("route", "greedy routing, replay or layered traversal");
  auto* g_flag = route_cmd->add_flag("--greedy", o.greedy, "follow heaviest edges");
  auto* r_flag = route_cmd->add_flag("--replay", o.replay_flag, "replay visit orders");
  auto* l_flag = route_cmd->add_flag("--layers", o.layers, "one greedy hop per layer");
  g_flag->excludes(r_flag)->excludes(l_flag);
  r_flag->excludes(l_flag);
  route_cmd->add_option("graphs", o.files, "graph file(s)")->required();
  route_cmd->add_option("--start", o.start, "start node key");
  route_cmd->add_option("--max-steps", o.max_steps, "hop limit for --greedy");
  route_cmd->add_option("--times", o.times, "layer times for --layers")->delimiter(',');

  auto* export_cmd = app.add_subcommand("export", "matrix, tensor and DOT encodings");
  export_cmd->require_subcommand(1);
  auto* matrix_cmd = export_cmd->add_subcommand("matrix", "adjacency matrix CSV");
  auto* tensor_cmd = export_cmd->add_subcommand("tensor", "layer tensor as CSV blocks");
  auto* dot_cmd = export_cmd->add_subcommand("dot", "Graphviz DOT");
  for (auto* sub : {matrix_cmd, tensor_cmd}) {
    sub->add_option("--mode", o.mode, "counts or probabilities")->check(CLI::IsMember({"counts", "probabilities"}));
  }
  matrix_cmd->add_option("graph", o.files, "graph file")->required()->expected(1);
  tensor_cmd->add_option("graphs", o.files, "graph files, one per layer")->required();
  tensor_cmd->add_option("--times", o.times, "layer times")->delimiter(',');
  dot_cmd->add_option("file", o.files, "graph file, or machine file with --rules")->required()->expected(1);
  dot_cmd->add_flag("--rules", o.rules, "treat the file as a machine and draw its transition rules");
  for (auto* sub : {matrix_cmd, tensor_cmd, dot_cmd}) add_out(sub);

  auto* import_cmd = app.add_subcommand("import", "read encodings back into graphs");
  import_cmd->require_subcommand(1);
  auto* import_matrix = import_cmd->add_subcommand("matrix", "adjacency matrix CSV to graph");
  import_matrix->add_option("csv", o.files, "CSV file")->required()->expected(1);
  import_matrix->add_option("--mode", o.mode, "counts or probabilities")->check(CLI::IsMember({"counts", "probabilities"}));
  import_matrix->add_option("--provenance", o.provenance, "machine name to record");
  import_matrix->add_option("--blank", o.blank, "blank symbol used in node keys");
  add_out(import_matrix);

  auto* acc_cmd = app.add_subcommand("accuracy", "autoregressive accuracy (1-eps)^L");
  auto* c_flag = acc_cmd->add_flag("--closed", o.closed, "closed form");
  auto* mc_flag = acc_cmd->add_flag("--mc", o.mc, "Monte Carlo estimate");
  c_flag->excludes(mc_flag);
  acc_cmd->add_option("--epsilon", o.epsilon, "per-step error probability")->required();
  acc_cmd->add_option("--length", o.length, "output length L")->required();
  acc_cmd->add_option("--trials", o.trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
  acc_cmd->add_option("--seed", o.seed, "random seed");
  acc_cmd->add_option("--shards", o.shards, "parallel shards")->check(CLI::PositiveNumber);

  auto* cost_cmd = app.add_subcommand("cost", "attention cost L * N^2");
  cost_cmd->add_option("--tokens", o.tokens, "N")->required();
  cost_cmd->add_option("--layers", o.layer_count, "L")->required();

  auto* sat_cmd = app.add_subcommand("saturation", "graph saturation metrics");
  sat_cmd->add_option("graph", o.files, "graph file")->required()->expected(1);
  sat_cmd->add_flag("--self-loops", o.self_loops, "count self-loops in density");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run_cmd) {
      Machine m = load_machine(o.machine);
      emit(run_summary(run(m, expect(parse_tape(o.input, m), "input"), o.budget), o), o.out);
    } else if (*limit_cmd) {
      Machine m = load_machine(o.machine);
      Trace t = run(m, expect(parse_tape(o.input, m), "input"), o.budget);
      emit(format_limit_report(limit_configuration(t, m)), o.out);
    } else if (*trans_cmd) {
      Machine m = load_machine(o.machine);
      StageSchedule schedule;
      schedule.budgets = o.schedule.empty() ? std::vector<std::size_t>{o.budget} : o.schedule;
      emit(run_summary(run_transfinite(m, expect(parse_tape(o.input, m), "input"), schedule, o.max_limits), o), o.out);
    } else if (*halt_cmd) {
      Machine m = load_machine(o.machine);
      std::cout << format_verdict(decide_halting_at_omega(m, expect(parse_tape(o.input, m), "input"), o.budget)) << "\n";
    } else if (*collapse_cmd || *evolution_cmd) {
      Machine m = load_machine(o.machine);
      Trace t = trace_for(o, m);
      emit(format_graph(*collapse_cmd ? collapse(t) : evolution_graph(t)), o.out);
    } else if (*merge_cmd) {
      std::vector<StateGraph> graphs;
      for (const auto& f : o.files) graphs.push_back(parse_graph(read_file(f)));
      emit(format_graph(merge(graphs)), o.out);
    } else if (*route_cmd) {
      if (o.layers) {
        auto path = traverse_layers(load_layers(o.files, o.times), o.start);
        for (const auto& h : path.hops) std::cout << "t=" << format_ordinal(h.time) << " " << h.from << " -> " << h.to << "\n";
        std::cout << "stop=" << (path.stop == LayerStop::Completed ? "completed" : path.stop == LayerStop::Sink ? "sink" : "key-absent")
                  << "\n";
      } else {
        if (o.files.size() != 1) throw Error(ErrorKind::DomainError, "--greedy and --replay take one graph");
        StateGraph g = parse_graph(read_file(o.files[0]));
        std::string start = o.start;
        if (start.empty()) {
          auto s = replay_start(g);
          if (!s) throw Error(ErrorKind::UnknownNode, "no --start given and none can be inferred");
          start = *s;
        }
        auto path = o.replay_flag ? replay(g, start) : route_greedy(g, start, o.max_steps);
        for (const auto& k : path) std::cout << k << "\n";
      }
    } else if (*matrix_cmd) {
      emit(format_matrix_csv(to_adjacency(parse_graph(read_file(o.files[0])), parse_mode(o.mode))), o.out);
    } else if (*tensor_cmd) {
      emit(format_tensor(to_layer_tensor(load_layers(o.files, o.times), parse_mode(o.mode))), o.out);
    } else if (*dot_cmd) {
      emit(o.rules ? rules_to_dot(load_machine(o.files[0])) : to_dot(parse_graph(read_file(o.files[0]))), o.out);
    } else if (*import_matrix) {
      auto matrix = parse_matrix_csv(read_file(o.files[0]), parse_mode(o.mode));
      emit(format_graph(from_adjacency(matrix, o.provenance, o.blank)), o.out);
    } else if (*acc_cmd) {
      AccuracyModel model{o.epsilon, o.length};
      if (o.mc) {
        auto est = accuracy_monte_carlo(model, o.trials, o.seed, o.shards);
        std::cout << "rate=" << detail::format_double(est.rate) << "\nstandard_error="
                  << detail::format_double(est.standard_error) << "\nsuccesses=" << est.successes
                  << "\ntrials=" << est.trials << "\nseed=" << o.seed << "\n";
      } else {
        std::cout << "p_correct=" << detail::format_double(accuracy_closed_form(model)) << "\n";
      }
    } else if (*cost_cmd) {
      std::cout << "comparisons=" << attention_cost(o.tokens, o.layer_count) << "\n";
    } else if (*sat_cmd) {
      std::cout << format_saturation(saturation(parse_graph(read_file(o.files[0])), o.self_loops));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
