// hullnet: disjoint convex hull decompositions, per-activation margin
// requirements, and explicit two-hidden-layer separating networks for
// two-class point sets.
//
// Subcommands: decompose, delta, construct, verify, train. Datasets come in
// as numeric CSV (--csv FILE --label-col COL) or an MNIST-style IDX pair
// (--idx IMAGES,LABELS). Machine-readable reports go to --out files; stdout
// stays human-readable. Exit codes: 0 success/verified, 1 verification
// failed, 2 input error.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "hullnet/dataio.hpp"
#include "hullnet/decomposition.hpp"
#include "hullnet/network_builder.hpp"
#include "hullnet/serialize.hpp"
#include "hullnet/trainer.hpp"
#include "hullnet/version.hpp"

namespace {

using namespace hullnet;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct DatasetArgs {
  std::string csv_path;
  std::string label_col = "label";
  std::string idx_paths;         // "images,labels"
  std::string label_pair = "";   // "a,b"
  bool raw = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--csv", csv_path, "numeric CSV dataset");
    cmd->add_option("--label-col", label_col,
                    "CSV label column (name, or index when headerless)");
    cmd->add_option("--idx", idx_paths, "IDX pair: images,labels");
    cmd->add_option("--labels", label_pair,
                    "two class labels to use, e.g. 0,1 (default: first two)");
    cmd->add_flag("--raw", raw, "keep IDX pixel values in 0..255");
  }

  static std::pair<std::string, std::string> split_pair(const std::string& s,
                                                        const char* what) {
    const auto comma = s.find(',');
    if (comma == std::string::npos)
      throw DataError(std::string(what) + " expects two comma-separated values");
    return {s.substr(0, comma), s.substr(comma + 1)};
  }

  LabeledDataset load() const {
    if (!csv_path.empty() && !idx_paths.empty())
      throw DataError("use either --csv or --idx, not both");
    if (!csv_path.empty()) return load_csv(csv_path, label_col);
    if (!idx_paths.empty()) {
      const auto [images, labels] = split_pair(idx_paths, "--idx");
      std::set<int> keep;
      if (!label_pair.empty()) {
        const auto [a, b] = split_pair(label_pair, "--labels");
        keep = {std::stoi(a), std::stoi(b)};
      }
      return load_idx(images, labels, keep, !raw);
    }
    throw DataError("no dataset given; use --csv or --idx");
  }

  std::pair<int, int> pick_labels(const LabeledDataset& ds) const {
    if (!label_pair.empty()) {
      const auto [a, b] = split_pair(label_pair, "--labels");
      return {std::stoi(a), std::stoi(b)};
    }
    if (ds.label_universe.size() < 2)
      throw DataError(ds.name + ": need two classes, found " +
                      std::to_string(ds.label_universe.size()));
    return {ds.label_universe[0], ds.label_universe[1]};
  }

  json describe() const {
    json j;
    if (!csv_path.empty()) {
      j["csv"] = csv_path;
      j["label_col"] = label_col;
    }
    if (!idx_paths.empty()) {
      j["idx"] = idx_paths;
      j["raw"] = raw;
    }
    if (!label_pair.empty()) j["labels"] = label_pair;
    return j;
  }
};

json base_report(const std::string& command, std::uint64_t seed, int threads,
                 const DatasetArgs& data) {
  return json{{"schema_version", kReportSchemaVersion},
              {"tool_version", kVersion},
              {"command", command},
              {"seed", seed},
              {"threads", threads},
              {"inputs", data.describe()},
              {"timings_ms", json::object()}};
}

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? int(hw) : 1;
}

std::size_t resolve_projections(std::size_t n_projections, std::size_t dim) {
  return n_projections > 0 ? n_projections
                           : std::max<std::size_t>(200, 2 * dim);
}

struct LoadedPair {
  PointSet a, b;
  int label_a = 0, label_b = 0;
};

LoadedPair load_pair(const DatasetArgs& args) {
  const auto ds = args.load();
  const auto [la, lb] = args.pick_labels(ds);
  auto [a, b] = split_binary(ds, la, lb);
  return {std::move(a), std::move(b), la, lb};
}

int cmd_decompose(const DatasetArgs& data, std::size_t n_projections,
                  std::uint64_t seed, int threads, const std::string& out) {
  const auto t0 = Clock::now();
  const auto pair = load_pair(data);
  const double t_load = ms_since(t0);

  const auto t1 = Clock::now();
  const std::size_t projections = resolve_projections(n_projections, pair.a.dim());
  const auto dec = estimate_decomposition(pair.a, pair.b, projections, seed);
  const double t_dec = ms_since(t1);

  const auto t2 = Clock::now();
  const auto val = validate_decomposition(pair.a, pair.b, dec, -1.0, threads);
  const double t_val = ms_since(t2);

  std::printf("L1=%zu L2=%zu valid=%s min_distance=%.9g peel_iterations=%zu\n",
              dec.l1(), dec.l2(), val.valid ? "true" : "false", val.min_distance,
              dec.peel_iterations);

  if (!out.empty()) {
    json rep = base_report("decompose", seed, threads, data);
    rep["labels_used"] = {pair.label_a, pair.label_b};
    rep["class_sizes"] = {pair.a.size(), pair.b.size()};
    rep["dim"] = pair.a.dim();
    rep["projections"] = projections;
    rep["decomposition"] = to_json(dec);
    rep["valid"] = val.valid;
    rep["min_pairwise_distance"] = val.min_distance;
    rep["pair_distances"] = val.pair_distances;
    rep["timings_ms"] = {{"load", t_load}, {"decompose", t_dec}, {"validate", t_val}};
    save_json(rep, out);
  }
  return val.valid ? 0 : 1;
}

int cmd_delta(const DatasetArgs& data, std::vector<std::string> activations,
              std::size_t given_l, std::size_t n_projections, std::uint64_t seed,
              int threads, const std::string& out) {
  const auto pair = load_pair(data);
  if (activations.empty())
    activations = {"sigmoid", "tanh", "relu", "leaky_relu:0.2:1"};

  const auto t0 = Clock::now();
  const auto hd = hull_distance(pair.a, pair.b);
  const double t_delta = ms_since(t0);
  std::printf("raw inter-hull delta=%.9g converged=%s\n", hd.distance,
              hd.converged ? "true" : "false");

  std::size_t l = given_l;
  json dec_json;
  if (l == 0) {
    const std::size_t projections =
        resolve_projections(n_projections, pair.a.dim());
    const auto dec = estimate_decomposition(pair.a, pair.b, projections, seed);
    l = std::max(dec.l1(), dec.l2());
    dec_json = {{"l1", dec.l1()}, {"l2", dec.l2()}};
    std::printf("estimated parts: L1=%zu L2=%zu (using L=%zu)\n", dec.l1(),
                dec.l2(), l);
  }

  bool needs_diam = false;
  for (const auto& name : activations)
    if (name.rfind("leaky_relu", 0) == 0) needs_diam = true;
  double diam = 0.0;
  if (needs_diam) {
    PointSet both = pair.a;
    for (std::size_t i = 0; i < pair.b.size(); ++i) both.add(pair.b[i]);
    diam = diameter(both, threads);
  }

  json table = json::array();
  for (const auto& name : activations) {
    const auto act = ActivationSpec::parse(name);
    const double md = act.kind == Activation::leaky_relu
                          ? min_delta(act, l, diam)
                          : min_delta(act, l);
    std::printf("min_delta[%s] at L=%zu: %.9g\n", act.name().c_str(), l, md);
    json row{{"activation", act.name()}, {"L", l}, {"min_delta", md}};
    if (act.kind == Activation::leaky_relu) row["D"] = diam;
    table.push_back(row);
  }

  if (!out.empty()) {
    json rep = base_report("delta", seed, threads, data);
    rep["labels_used"] = {pair.label_a, pair.label_b};
    rep["raw_delta"] = hd.distance;
    rep["raw_delta_converged"] = hd.converged;
    rep["delta_table"] = table;
    if (!dec_json.is_null()) rep["decomposition_summary"] = dec_json;
    rep["timings_ms"] = {{"hull_distance", t_delta}};
    save_json(rep, out);
  }
  return 0;
}

int cmd_construct(const DatasetArgs& data, const std::string& activation,
                  std::size_t n_projections, std::uint64_t seed, double slack,
                  double user_delta, bool no_auto_slope, int threads,
                  const std::string& net_out, const std::string& report_out) {
  const auto pair = load_pair(data);
  const auto act = ActivationSpec::parse(activation);

  const auto t0 = Clock::now();
  const std::size_t projections = resolve_projections(n_projections, pair.a.dim());
  const auto dec = estimate_decomposition(pair.a, pair.b, projections, seed);
  const double t_dec = ms_since(t0);

  const auto t1 = Clock::now();
  const auto val = validate_decomposition(pair.a, pair.b, dec, -1.0, threads);
  const double t_val = ms_since(t1);
  if (!val.valid) {
    std::fprintf(stderr, "estimated decomposition failed validation\n");
    return 1;
  }

  ConstructOptions opts;
  opts.slack = slack;
  opts.user_delta = user_delta;
  opts.leaky_auto_slope = !no_auto_slope;
  opts.threads = threads;

  const auto t2 = Clock::now();
  const auto net = construct(pair.a, pair.b, dec, act, opts);
  const double t_con = ms_since(t2);

  const auto t3 = Clock::now();
  const auto rep = verify_separation(net, pair.a, pair.b);
  const double t_ver = ms_since(t3);

  std::printf("hidden sizes: %zu + %zu (L1=%zu, L2=%zu)\n", net.layer1.out_dim,
              net.layer2.out_dim, dec.l1(), dec.l2());
  std::printf("activation used: %s\n", net.activation.name().c_str());
  if (net.requested_activation)
    std::printf("note: negative slope adapted from %s\n",
                net.requested_activation->name().c_str());
  std::printf("all_correct=%s misclassified=%zu final_hull_distance=%.9g\n",
              rep.all_correct ? "true" : "false", rep.misclassified.size(),
              rep.final_hull_distance);

  if (!net_out.empty()) save_json(to_json(net), net_out);
  if (!report_out.empty()) {
    json out = base_report("construct", seed, threads, data);
    out["labels_used"] = {pair.label_a, pair.label_b};
    out["activation_requested"] = act.name();
    out["activation_used"] = net.activation.name();
    out["decomposition_summary"] = {{"l1", dec.l1()},
                                    {"l2", dec.l2()},
                                    {"min_pairwise_distance", val.min_distance}};
    out["separation"] = to_json(rep);
    out["cert1"] = to_json(net.cert1);
    out["cert2"] = to_json(net.cert2);
    out["timings_ms"] = {{"decompose", t_dec},
                         {"validate", t_val},
                         {"construct", t_con},
                         {"verify", t_ver}};
    save_json(out, report_out);
  }
  return rep.all_correct ? 0 : 1;
}

int cmd_verify(const std::string& net_path, const DatasetArgs& data,
               const std::string& out, int threads, std::uint64_t seed) {
  const auto net = network_from_json(load_json(net_path));
  const auto pair = load_pair(data);
  const auto t0 = Clock::now();
  const auto rep = verify_separation(net, pair.a, pair.b);
  const double t_ver = ms_since(t0);
  std::printf("all_correct=%s misclassified=%zu final_hull_distance=%.9g\n",
              rep.all_correct ? "true" : "false", rep.misclassified.size(),
              rep.final_hull_distance);
  if (!out.empty()) {
    json j = base_report("verify", seed, threads, data);
    j["net"] = net_path;
    j["separation"] = to_json(rep);
    j["timings_ms"] = {{"verify", t_ver}};
    save_json(j, out);
  }
  return rep.all_correct ? 0 : 1;
}

std::vector<std::pair<std::size_t, std::size_t>> parse_sizes(
    const std::string& sizes) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::stringstream ss(sizes);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto x = tok.find('x');
    if (x == std::string::npos)
      throw DataError("--sizes expects h1xh2 pairs, got '" + tok + "'");
    out.emplace_back(std::stoul(tok.substr(0, x)), std::stoul(tok.substr(x + 1)));
  }
  if (out.empty()) throw DataError("--sizes is empty");
  return out;
}

int cmd_train(const DatasetArgs& data, const std::string& sizes,
              const std::string& activations, std::size_t epochs,
              std::size_t batch, std::size_t runs, double lr,
              std::uint64_t seed, int threads, const std::string& out) {
  const auto pair = load_pair(data);
  PointSet pts(pair.a.dim());
  std::vector<int> labels;
  for (std::size_t i = 0; i < pair.a.size(); ++i) {
    pts.add(pair.a[i]);
    labels.push_back(0);
  }
  for (std::size_t i = 0; i < pair.b.size(); ++i) {
    pts.add(pair.b[i]);
    labels.push_back(1);
  }

  std::vector<ActivationSpec> acts;
  {
    std::stringstream ss(activations);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) acts.push_back(ActivationSpec::parse(tok));
  }
  if (acts.empty())
    for (const char* name : {"sigmoid", "tanh", "relu", "leaky_relu:0.2:1"})
      acts.push_back(ActivationSpec::parse(name));

  TrainConfig base;
  base.epochs = epochs;
  base.batch_size = batch;
  base.runs = runs;
  base.learning_rate = lr;
  base.seed = seed;

  const auto t0 = Clock::now();
  const auto cells =
      size_sweep(pts, labels, parse_sizes(sizes), acts, base, threads);
  const double t_sweep = ms_since(t0);

  for (const auto& c : cells)
    std::printf("(%zu,%zu) %-18s loss=%-12.6g acc=%.4f%s\n", c.h1, c.h2,
                c.activation.c_str(), c.final_loss, c.accuracy,
                c.ok ? "" : (" ERROR: " + c.error).c_str());
  std::printf("sweep: %zu cells in %.1f ms\n", cells.size(), t_sweep);

  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw DataError("cannot write " + out);
    f << sweep_csv(cells);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"convex hull decompositions and constructive two-hidden-layer "
               "separating networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hullnet::kVersion));

  std::uint64_t seed = 0;
  int threads = 0;
  app.add_option("--seed", seed, "RNG seed (default 0)")->capture_default_str();
  app.add_option("--threads", threads,
                 "worker threads; 0 = hardware concurrency");

  DatasetArgs dec_data, delta_data, con_data, ver_data, train_data;

  auto* dec_cmd = app.add_subcommand("decompose",
                                     "estimate and validate a decomposition");
  std::size_t dec_projections = 0;
  std::string dec_out;
  dec_data.attach(dec_cmd);
  dec_cmd->add_option("--projections", dec_projections,
                      "random 1-D projections (0 = max(200, 2*dim))");
  dec_cmd->add_option("--out", dec_out, "JSON report path");

  auto* delta_cmd =
      app.add_subcommand("delta", "raw inter-hull gap and per-activation "
                                  "minimal margins");
  std::vector<std::string> delta_acts;
  std::size_t delta_l = 0, delta_projections = 0;
  std::string delta_out;
  delta_data.attach(delta_cmd);
  delta_cmd->add_option("--activation", delta_acts,
                        "activation (repeatable; default: all four)");
  delta_cmd->add_option("--L", delta_l, "part count (default: estimated)");
  delta_cmd->add_option("--projections", delta_projections,
                        "projections for the estimate");
  delta_cmd->add_option("--out", delta_out, "JSON report path");

  auto* con_cmd = app.add_subcommand("construct",
                                     "build and verify a separating network");
  std::string con_act = "relu", con_net_out, con_report_out;
  std::size_t con_projections = 0;
  double con_slack = 0.1, con_delta = 0.0;
  bool con_no_auto = false;
  con_data.attach(con_cmd);
  con_cmd->add_option("--activation", con_act, "activation kind")
      ->capture_default_str();
  con_cmd->add_option("--projections", con_projections, "projections");
  con_cmd->add_option("--slack", con_slack, "margin slack in (0,1)")
      ->capture_default_str();
  con_cmd->add_option("--delta", con_delta, "minimum imposed per-layer gap");
  con_cmd->add_flag("--no-auto-slope", con_no_auto,
                    "fail instead of adapting infeasible leaky slopes");
  con_cmd->add_option("--out", con_net_out, "network JSON path");
  con_cmd->add_option("--report", con_report_out, "JSON report path");

  auto* ver_cmd = app.add_subcommand("verify",
                                     "check a stored network against a dataset");
  std::string ver_net, ver_out;
  ver_data.attach(ver_cmd);
  ver_cmd->add_option("--net", ver_net, "network JSON path")->required();
  ver_cmd->add_option("--out", ver_out, "JSON report path");

  auto* train_cmd = app.add_subcommand("train", "SGD size/activation sweep");
  std::string train_sizes = "36x6", train_acts, train_out;
  std::size_t train_epochs = 20, train_batch = 150, train_runs = 3;
  double train_lr = 0.05;
  train_data.attach(train_cmd);
  train_cmd->add_option("--sizes", train_sizes, "h1xh2 list, e.g. 1x1,36x6")
      ->capture_default_str();
  train_cmd->add_option("--activations", train_acts,
                        "comma list (default: all four)");
  train_cmd->add_option("--epochs", train_epochs, "")->capture_default_str();
  train_cmd->add_option("--batch", train_batch, "")->capture_default_str();
  train_cmd->add_option("--runs", train_runs, "")->capture_default_str();
  train_cmd->add_option("--lr", train_lr, "")->capture_default_str();
  train_cmd->add_option("--out", train_out, "sweep CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    const int nthreads = resolve_threads(threads);
    if (dec_cmd->parsed())
      return cmd_decompose(dec_data, dec_projections, seed, nthreads, dec_out);
    if (delta_cmd->parsed())
      return cmd_delta(delta_data, delta_acts, delta_l, delta_projections, seed,
                       nthreads, delta_out);
    if (con_cmd->parsed())
      return cmd_construct(con_data, con_act, con_projections, seed, con_slack,
                           con_delta, con_no_auto, nthreads, con_net_out,
                           con_report_out);
    if (ver_cmd->parsed())
      return cmd_verify(ver_net, ver_data, ver_out, nthreads, seed);
    if (train_cmd->parsed())
      return cmd_train(train_data, train_sizes, train_acts, train_epochs,
                       train_batch, train_runs, train_lr, seed, nthreads,
                       train_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
