#include "ratekit/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

#include "ratekit/bnn.hpp"
#include "ratekit/error.hpp"
#include "ratekit/esa.hpp"
#include "ratekit/eval.hpp"
#include "ratekit/io.hpp"
#include "ratekit/rate.hpp"
#include "ratekit/simgen.hpp"
#include "ratekit/svg.hpp"

namespace ratekit::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

json default_config() {
  return json::parse(R"({
    "seed": 0,
    "output_dir": "",
    "data": {"dataset": "", "model": "", "report": "", "mask": "", "groups": ""},
    "simulate": {"n": 1000, "p": 100, "frac_causal": 0.1, "frac_redundant": 0.0,
                 "clusters_per_class": 2, "n_classes": 2, "class_sep": 1.0, "flip_y": 0.01},
    "network": {"hidden_sizes": [512, 512], "link": "sigmoid", "n_classes": 0,
                "prior_scale": 1.0, "noise_variance": 1.0},
    "train": {"epochs": 20, "learning_rate": 0.001, "patience": 2, "batch_size": 32,
              "mc_samples": 1, "val_fraction": 0.2, "kl_scale_mode": "batch_fraction",
              "test_fraction": 0.2},
    "rate": {"jitter": 1e-8, "path": "fast", "split": "test"},
    "evaluate": {"fractions": [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5],
                 "repeats": 10},
    "collinearity": {"rho": 0.999, "reps": 100, "n": 5000}
  })");
}

enum class Kind { integer, real, text, int_list, real_list };

// A command-line flag that overrides one field of the JSON config.
struct Flag {
  std::string name;
  std::string pointer;
  Kind kind;
  std::string help;
  std::string raw;
  CLI::Option* option = nullptr;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

json parse_flag(const Flag& flag) {
  try {
    switch (flag.kind) {
      case Kind::integer: return std::stoll(flag.raw);
      case Kind::real: return std::stod(flag.raw);
      case Kind::text: return flag.raw;
      case Kind::int_list: {
        json arr = json::array();
        for (const auto& v : split_list(flag.raw)) arr.push_back(std::stoll(v));
        return arr;
      }
      case Kind::real_list: {
        json arr = json::array();
        for (const auto& v : split_list(flag.raw)) arr.push_back(std::stod(v));
        return arr;
      }
    }
  } catch (const std::logic_error&) {
  }
  throw UsageError("cannot parse value '" + flag.raw + "' for " + flag.name);
}

struct Context {
  json config;
  fs::path out_dir;
  std::string stage;
  std::ostream* out = nullptr;
};

template <typename T>
T cfg(const Context& ctx, const std::string& pointer) {
  try {
    return ctx.config.at(json::json_pointer(pointer)).get<T>();
  } catch (const json::exception& e) {
    throw InvalidInput("config field " + pointer + ": " + e.what());
  }
}

fs::path required_path(const Context& ctx, const std::string& pointer, const std::string& flag) {
  const auto value = cfg<std::string>(ctx, pointer);
  if (value.empty()) throw UsageError("missing required " + flag);
  fs::path path(value);
  if (!fs::exists(path)) throw InvalidInput("file not found: " + value);
  return path;
}

void write_output(const Context& ctx, const std::string& name, const std::string& content) {
  io::write_text(ctx.out_dir / name, content);
}

void write_effective_config(const Context& ctx) {
  write_output(ctx, "effective_config.json", ctx.config.dump(2) + "\n");
}

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{seed, stream};
  std::mt19937_64 rng(seq);
  return rng();
}

// ---------------------------------------------------------------------------

int run_simulate(Context& ctx) {
  ctx.stage = "generate";
  SynthSpec spec;
  spec.n = cfg<int>(ctx, "/simulate/n");
  spec.p = cfg<int>(ctx, "/simulate/p");
  spec.frac_causal = cfg<double>(ctx, "/simulate/frac_causal");
  spec.frac_redundant = cfg<double>(ctx, "/simulate/frac_redundant");
  spec.n_clusters_per_class = cfg<int>(ctx, "/simulate/clusters_per_class");
  spec.n_classes = cfg<int>(ctx, "/simulate/n_classes");
  spec.class_sep = cfg<double>(ctx, "/simulate/class_sep");
  spec.flip_y = cfg<double>(ctx, "/simulate/flip_y");
  spec.seed = cfg<std::uint64_t>(ctx, "/seed");
  const SyntheticData synth = synth_classification(spec);

  ctx.stage = "write";
  write_output(ctx, "dataset.csv", io::dataset_to_csv(synth.data));
  json mask = io::mask_to_json(*synth.data.causal_mask, spec.seed);
  mask["source_index"] = synth.source_index;
  json blocks = json::array();
  for (auto b : synth.block_of) {
    blocks.push_back(b == FeatureBlock::causal ? "causal" : b == FeatureBlock::redundant ? "redundant" : "noise");
  }
  mask["blocks"] = std::move(blocks);
  write_output(ctx, "dataset.mask.json", mask.dump(2) + "\n");
  write_effective_config(ctx);
  *ctx.out << "wrote " << (ctx.out_dir / "dataset.csv").string() << " (n=" << spec.n << ", p=" << spec.p
           << ", causal=" << spec.n_causal() << ")\n";
  return kOk;
}

struct LoadedModel {
  Network net;
  std::vector<Eigen::Index> test_rows;
  std::vector<Eigen::Index> train_rows;
};

LoadedModel load_model(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(io::read_text(path));
  } catch (const json::parse_error& e) {
    throw InvalidInput("model json: " + std::string(e.what()));
  }
  LoadedModel m;
  m.net = io::network_from_json(doc);
  if (doc.contains("split")) {
    m.test_rows = doc["split"].at("test_rows").get<std::vector<Eigen::Index>>();
    m.train_rows = doc["split"].at("train_rows").get<std::vector<Eigen::Index>>();
  }
  return m;
}

int run_train(Context& ctx) {
  ctx.stage = "load-data";
  const Dataset data = io::read_dataset_csv(required_path(ctx, "/data/dataset", "--data"));
  data.validate();

  ctx.stage = "configure";
  const auto seed = cfg<std::uint64_t>(ctx, "/seed");
  NetworkConfig ncfg;
  ncfg.input_dim = static_cast<int>(data.p());
  ncfg.hidden_sizes = cfg<std::vector<int>>(ctx, "/network/hidden_sizes");
  ncfg.link = link_from_string(cfg<std::string>(ctx, "/network/link"));
  ncfg.prior_scale = cfg<double>(ctx, "/network/prior_scale");
  ncfg.noise_variance = cfg<double>(ctx, "/network/noise_variance");
  int n_classes = cfg<int>(ctx, "/network/n_classes");
  if (n_classes <= 0) {
    n_classes = ncfg.link == Link::softmax ? static_cast<int>(data.y.maxCoeff()) + 1 : 1;
  }
  ncfg.n_classes = n_classes;
  ncfg.validate();

  TrainConfig tcfg;
  tcfg.epochs = cfg<int>(ctx, "/train/epochs");
  tcfg.learning_rate = cfg<double>(ctx, "/train/learning_rate");
  tcfg.patience = cfg<int>(ctx, "/train/patience");
  tcfg.batch_size = cfg<int>(ctx, "/train/batch_size");
  tcfg.mc_samples = cfg<int>(ctx, "/train/mc_samples");
  tcfg.val_fraction = cfg<double>(ctx, "/train/val_fraction");
  tcfg.kl_scale_mode = kl_scale_from_string(cfg<std::string>(ctx, "/train/kl_scale_mode"));
  tcfg.seed = derived_seed(seed, 2);
  tcfg.validate();

  const Split split = train_test_split(data.n(), cfg<double>(ctx, "/train/test_fraction"), derived_seed(seed, 1));
  const Dataset train_set = data.rows(split.train);
  const Dataset test_set = data.rows(split.test);

  ctx.stage = "train";
  const TrainResult result = train(build_network(ncfg, derived_seed(seed, 3)), train_set.x, train_set.y, tcfg);

  ctx.stage = "write";
  json model = io::network_to_json(result.network);
  model["split"] = {{"test_fraction", cfg<double>(ctx, "/train/test_fraction")},
                    {"test_rows", split.test},
                    {"train_rows", split.train}};
  write_output(ctx, "model.json", model.dump() + "\n");

  std::string history = "epoch,train_loss," + result.history.metric_name + "\n";
  for (const auto& e : result.history.epochs) {
    history += std::to_string(e.epoch) + ',' + io::format_double(e.train_loss) + ',' + io::format_double(e.metric) + '\n';
  }
  write_output(ctx, "history.csv", history);

  json metrics = {{"metric", result.history.metric_name},
                  {"best_epoch", result.history.best_epoch},
                  {"epochs_run", result.history.epochs.size()},
                  {"stopped_early", result.history.stopped_early}};
  if (ncfg.link != Link::identity) {
    metrics["train_accuracy"] = accuracy(result.network, train_set.x, train_set.y);
    metrics["test_accuracy"] = accuracy(result.network, test_set.x, test_set.y);
  } else {
    const LogitPosterior lp = logit_posterior(result.network, test_set.x);
    metrics["test_mse"] = (lp.mean.col(0) - test_set.y).squaredNorm() / static_cast<double>(test_set.n());
  }
  write_output(ctx, "metrics.json", metrics.dump(2) + "\n");
  write_effective_config(ctx);
  *ctx.out << "trained " << result.history.epochs.size() << " epochs; " << metrics.dump() << "\n";
  return kOk;
}

struct EvalInputs {
  Dataset data;
  LoadedModel model;
  Dataset eval_set;
};

EvalInputs load_eval_inputs(Context& ctx, const std::string& split_name) {
  EvalInputs in;
  ctx.stage = "load-data";
  in.data = io::read_dataset_csv(required_path(ctx, "/data/dataset", "--data"));
  in.data.validate();
  ctx.stage = "load-model";
  in.model = load_model(required_path(ctx, "/data/model", "--model"));
  if (in.model.net.config.input_dim != in.data.p()) {
    throw InvalidInput("model expects " + std::to_string(in.model.net.config.input_dim) + " features, dataset has " +
                       std::to_string(in.data.p()));
  }
  ctx.stage = "select-split";
  const auto check_rows = [&](const std::vector<Eigen::Index>& rows) {
    if (rows.empty()) throw InvalidInput("model has no recorded '" + split_name + "' split");
    for (auto r : rows) {
      if (r < 0 || r >= in.data.n()) throw InvalidInput("model split refers to rows outside the dataset");
    }
    return in.data.rows(rows);
  };
  if (split_name == "test") {
    in.eval_set = check_rows(in.model.test_rows);
  } else if (split_name == "train") {
    in.eval_set = check_rows(in.model.train_rows);
  } else if (split_name == "all") {
    in.eval_set = in.data;
  } else {
    throw InvalidInput("unknown split '" + split_name + "' (expected test, train or all)");
  }
  return in;
}

EffectSizePosterior effect_sizes(Context& ctx, const EvalInputs& in) {
  ctx.stage = "effect-sizes";
  const LogitPosterior lp = logit_posterior(in.model.net, in.eval_set.x);
  return covariance_esa(in.eval_set.x, lp, in.data.feature_names);
}

int run_importance(Context& ctx) {
  const EvalInputs in = load_eval_inputs(ctx, cfg<std::string>(ctx, "/rate/split"));
  const EffectSizePosterior esa = effect_sizes(ctx, in);
  const KldPath path = kld_path_from_string(cfg<std::string>(ctx, "/rate/path"));
  const double jitter = cfg<double>(ctx, "/rate/jitter");

  ctx.stage = "rate";
  std::vector<ImportanceReport> reports;
  for (int c = 0; c < esa.c(); ++c) {
    const PrecisionModel pm = build_precision(esa, c, jitter);
    ImportanceReport report = rate_scores(pm, path, esa.feature_names);
    report.cls = c;
    reports.push_back(std::move(report));
  }

  ctx.stage = "write";
  write_output(ctx, "importance.json", io::report_to_json(reports).dump(2) + "\n");
  write_output(ctx, "importance.csv", io::report_to_csv(reports));
  write_output(ctx, "esa.csv", io::esa_to_csv(esa));
  write_effective_config(ctx);
  int significant = 0;
  for (const auto& r : reports) {
    for (const auto& item : r.items) significant += item.significant;
  }
  *ctx.out << "scored " << esa.p() << " features over " << reports.size() << " output node(s); " << significant
           << " above the 1/p threshold\n";
  return kOk;
}

int run_group_importance(Context& ctx) {
  const EvalInputs in = load_eval_inputs(ctx, cfg<std::string>(ctx, "/rate/split"));
  ctx.stage = "load-groups";
  const GroupMap groups =
      io::groups_from_csv(io::read_text(required_path(ctx, "/data/groups", "--groups")), in.data.feature_names);
  const EffectSizePosterior esa = effect_sizes(ctx, in);
  const KldPath path = kld_path_from_string(cfg<std::string>(ctx, "/rate/path"));
  const double jitter = cfg<double>(ctx, "/rate/jitter");

  ctx.stage = "group-rate";
  std::vector<ImportanceReport> reports;
  for (int c = 0; c < esa.c(); ++c) {
    ImportanceReport report = group_rate(build_precision(esa, c, jitter), groups, path);
    report.cls = c;
    reports.push_back(std::move(report));
  }

  ctx.stage = "write";
  write_output(ctx, "group_importance.json", io::report_to_json(reports).dump(2) + "\n");
  write_output(ctx, "group_importance.csv", io::report_to_csv(reports));
  write_effective_config(ctx);
  for (const auto& w : reports.front().warnings) *ctx.out << "warning: " << w << "\n";
  *ctx.out << "scored " << groups.size() << " groups\n";
  return kOk;
}

std::string degradation_csv(const DegradationCurve& by_rate, const DegradationCurve& by_random) {
  std::string out = "fraction,rate_mean,rate_std,random_mean,random_std\n";
  for (std::size_t i = 0; i < by_rate.fractions.size(); ++i) {
    out += io::format_double(by_rate.fractions[i]) + ',' + io::format_double(by_rate.mean_accuracy[i]) + ',' +
           io::format_double(by_rate.std_accuracy[i]) + ',' + io::format_double(by_random.mean_accuracy[i]) + ',' +
           io::format_double(by_random.std_accuracy[i]) + '\n';
  }
  return out;
}

int run_evaluate(Context& ctx) {
  const EvalInputs in = load_eval_inputs(ctx, cfg<std::string>(ctx, "/rate/split"));
  ctx.stage = "load-report";
  json report_doc;
  try {
    report_doc = json::parse(io::read_text(required_path(ctx, "/data/report", "--report")));
  } catch (const json::parse_error& e) {
    throw InvalidInput("report json: " + std::string(e.what()));
  }
  const std::vector<double> rates = io::rates_from_report_json(report_doc);
  if (static_cast<Eigen::Index>(rates.size()) != in.data.p()) {
    throw InvalidInput("report has " + std::to_string(rates.size()) + " features, dataset has " +
                       std::to_string(in.data.p()));
  }
  const auto seed = cfg<std::uint64_t>(ctx, "/seed");
  json summary;
  double rate_sum = 0.0;
  for (double r : rates) rate_sum += r;
  summary["rate_sum"] = rate_sum;

  if (!cfg<std::string>(ctx, "/data/mask").empty()) {
    ctx.stage = "roc";
    const json mask_doc = json::parse(io::read_text(required_path(ctx, "/data/mask", "--mask")));
    const std::vector<bool> mask = io::mask_from_json(mask_doc);
    if (static_cast<Eigen::Index>(mask.size()) != in.data.p()) throw InvalidInput("mask length does not match dataset");
    const RocCurve roc_rate = roc_auc(rates, mask);
    const Vector corr = marginal_correlation(in.eval_set.x, in.eval_set.y).corr.cwiseAbs();
    const RocCurve roc_corr = roc_auc(std::vector<double>(corr.data(), corr.data() + corr.size()), mask);
    write_output(ctx, "roc_rate.csv", io::roc_to_csv(roc_rate));
    write_output(ctx, "roc_correlation.csv", io::roc_to_csv(roc_corr));
    auto series = [](const std::string& name, const RocCurve& roc) {
      CurveSeries s{name, {}};
      for (std::size_t i = 0; i < roc.fpr.size(); ++i) s.points.emplace_back(roc.fpr[i], roc.tpr[i]);
      return s;
    };
    write_output(ctx, "roc.svg",
                 render_curve_svg({series("RATE", roc_rate), series("correlation", roc_corr)},
                                  "false positive rate", "true positive rate"));
    summary["auc_rate"] = roc_rate.auc;
    summary["auc_correlation"] = roc_corr.auc;
  }

  if (in.model.net.config.link != Link::identity) {
    ctx.stage = "shuffle-degradation";
    const auto fractions = cfg<std::vector<double>>(ctx, "/evaluate/fractions");
    const int repeats = cfg<int>(ctx, "/evaluate/repeats");
    const DegradationCurve by_rate = shuffle_degradation(in.model.net, in.eval_set, ranking_from_scores(rates),
                                                         fractions, repeats, derived_seed(seed, 10));
    const DegradationCurve by_random =
        shuffle_degradation(in.model.net, in.eval_set, random_ranking(static_cast<int>(in.data.p()), derived_seed(seed, 11)),
                            fractions, repeats, derived_seed(seed, 12));
    write_output(ctx, "degradation.csv", degradation_csv(by_rate, by_random));
    if (fractions.size() >= 2) {
      CurveSeries a{"RATE ranking", {}}, b{"random ranking", {}};
      for (std::size_t i = 0; i < fractions.size(); ++i) {
        a.points.emplace_back(fractions[i], by_rate.mean_accuracy[i]);
        b.points.emplace_back(fractions[i], by_random.mean_accuracy[i]);
      }
      write_output(ctx, "degradation.svg", render_curve_svg({a, b}, "fraction of features shuffled", "test accuracy"));
    }
    summary["baseline_accuracy"] = accuracy(in.model.net, in.eval_set.x, in.eval_set.y);
    json curve = json::array();
    for (std::size_t i = 0; i < fractions.size(); ++i) {
      curve.push_back({{"fraction", fractions[i]},
                       {"rate_mean", by_rate.mean_accuracy[i]},
                       {"rate_std", by_rate.std_accuracy[i]},
                       {"random_mean", by_random.mean_accuracy[i]},
                       {"random_std", by_random.std_accuracy[i]}});
    }
    summary["degradation"] = std::move(curve);
  }

  ctx.stage = "write";
  write_output(ctx, "evaluation.json", summary.dump(2) + "\n");
  write_effective_config(ctx);
  *ctx.out << summary.dump() << "\n";
  return kOk;
}

int run_demo_collinearity(Context& ctx) {
  ctx.stage = "simulate";
  const auto seed = cfg<std::uint64_t>(ctx, "/seed");
  const double rho = cfg<double>(ctx, "/collinearity/rho");
  const int reps = cfg<int>(ctx, "/collinearity/reps");
  const int n = cfg<int>(ctx, "/collinearity/n");
  if (reps < 2) throw InvalidInput("collinearity: reps must be >= 2");

  Matrix ols(reps, 2), cov(reps, 2);
  std::string rows = "replicate,ols_x1,ols_x2,esa_x1,esa_x2\n";
  for (int r = 0; r < reps; ++r) {
    const Dataset d = collinear_regression(n, rho, derived_seed(seed, static_cast<std::uint64_t>(r)));
    ols.row(r) = ols_effect_size(d.x, d.y).coef.transpose();
    cov.row(r) = covariance_esa(d.x, LogitPosterior::deterministic(d.y)).mu.front().transpose();
    rows += std::to_string(r) + ',' + io::format_double(ols(r, 0)) + ',' + io::format_double(ols(r, 1)) + ',' +
            io::format_double(cov(r, 0)) + ',' + io::format_double(cov(r, 1)) + '\n';
  }

  ctx.stage = "summarize";
  std::string summary = "estimator,coefficient,mean,std\n";
  auto add = [&](const char* name, const Matrix& m) {
    for (int j = 0; j < 2; ++j) {
      const double mean = m.col(j).mean();
      const double sd = std::sqrt((m.col(j).array() - mean).square().sum() / (reps - 1));
      summary += std::string(name) + ",x" + std::to_string(j + 1) + ',' + io::format_double(mean) + ',' +
                 io::format_double(sd) + '\n';
    }
  };
  add("ols", ols);
  add("covariance_esa", cov);

  ctx.stage = "write";
  write_output(ctx, "collinearity_replicates.csv", rows);
  write_output(ctx, "collinearity_summary.csv", summary);
  write_effective_config(ctx);
  *ctx.out << summary;
  return kOk;
}

struct Command {
  std::string name;
  std::string help;
  std::vector<Flag> flags;
  int (*run)(Context&);
  CLI::App* app = nullptr;
};

std::vector<Command> make_commands() {
  const Flag seed{"--seed", "/seed", Kind::integer, "global random seed", {}};
  const Flag data{"--data", "/data/dataset", Kind::text, "dataset CSV (features..., y)", {}};
  const Flag model{"--model", "/data/model", Kind::text, "model JSON written by `train`", {}};
  const Flag jitter{"--jitter", "/rate/jitter", Kind::real, "relative jitter for the covariance factorization", {}};
  const Flag path{"--path", "/rate/path", Kind::text, "KLD evaluation path: fast | naive", {}};
  const Flag split{"--split", "/rate/split", Kind::text, "evaluation rows: test | train | all", {}};

  std::vector<Command> cmds;
  cmds.push_back({"simulate",
                  "generate a synthetic classification dataset with a known causal mask",
                  {seed,
                   {"--n", "/simulate/n", Kind::integer, "rows", {}},
                   {"--p", "/simulate/p", Kind::integer, "features", {}},
                   {"--frac-causal", "/simulate/frac_causal", Kind::real, "fraction of causal features", {}},
                   {"--frac-redundant", "/simulate/frac_redundant", Kind::real, "fraction of redundant features", {}},
                   {"--clusters-per-class", "/simulate/clusters_per_class", Kind::integer, "clusters per class", {}},
                   {"--n-classes", "/simulate/n_classes", Kind::integer, "number of classes", {}},
                   {"--class-sep", "/simulate/class_sep", Kind::real, "hypercube half-side", {}},
                   {"--flip-y", "/simulate/flip_y", Kind::real, "label flip fraction", {}}},
                  run_simulate});
  cmds.push_back({"train",
                  "train the variational network and record the train/test split",
                  {seed,
                   data,
                   {"--hidden", "/network/hidden_sizes", Kind::int_list, "hidden layer widths, e.g. 512,512", {}},
                   {"--link", "/network/link", Kind::text, "sigmoid | softmax | identity", {}},
                   {"--n-classes", "/network/n_classes", Kind::integer, "output nodes (0 = infer)", {}},
                   {"--prior-scale", "/network/prior_scale", Kind::real, "prior standard deviation", {}},
                   {"--noise-variance", "/network/noise_variance", Kind::real, "Gaussian likelihood variance", {}},
                   {"--epochs", "/train/epochs", Kind::integer, "maximum epochs", {}},
                   {"--lr", "/train/learning_rate", Kind::real, "Adam learning rate", {}},
                   {"--patience", "/train/patience", Kind::integer, "early-stopping patience", {}},
                   {"--batch-size", "/train/batch_size", Kind::integer, "minibatch size", {}},
                   {"--mc-samples", "/train/mc_samples", Kind::integer, "Monte Carlo samples per step", {}},
                   {"--val-fraction", "/train/val_fraction", Kind::real, "validation fraction of training rows", {}},
                   {"--kl-scale", "/train/kl_scale_mode", Kind::text, "batch_fraction | full | none", {}},
                   {"--test-fraction", "/train/test_fraction", Kind::real, "held-out test fraction", {}}},
                  run_train});
  cmds.push_back({"importance", "score every feature (KLD, RATE, sign, MI)", {seed, data, model, jitter, path, split},
                  run_importance});
  cmds.push_back({"group-importance",
                  "score feature groups listed in a group_name,feature_name CSV",
                  {seed, data, model, jitter, path, split,
                   {"--groups", "/data/groups", Kind::text, "group annotation CSV", {}}},
                  run_group_importance});
  cmds.push_back({"evaluate",
                  "ROC against a causal mask and shuffle-degradation curves",
                  {seed, data, model, split,
                   {"--report", "/data/report", Kind::text, "importance.json written by `importance`", {}},
                   {"--mask", "/data/mask", Kind::text, "mask JSON written by `simulate`", {}},
                   {"--fractions", "/evaluate/fractions", Kind::real_list, "shuffle fractions, e.g. 0,0.1,0.2", {}},
                   {"--repeats", "/evaluate/repeats", Kind::integer, "shuffle repeats per fraction", {}}},
                  run_evaluate});
  cmds.push_back({"demo-collinearity",
                  "OLS vs covariance effect sizes on two collinear predictors",
                  {seed,
                   {"--rho", "/collinearity/rho", Kind::real, "correlation between x1 and x2", {}},
                   {"--reps", "/collinearity/reps", Kind::integer, "replicates", {}},
                   {"--n", "/collinearity/n", Kind::integer, "rows per replicate", {}}},
                  run_demo_collinearity});
  return cmds;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"ratekit: variable importance for variational Bayesian neural networks", "ratekit"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  app.add_option("--config", config_path, "JSON config; flags override its fields");
  app.add_option("--out", out_dir, "output directory");

  std::vector<Command> commands = make_commands();
  for (auto& cmd : commands) {
    cmd.app = app.add_subcommand(cmd.name, cmd.help);
    cmd.app->add_option("--config", config_path, "JSON config; flags override its fields");
    cmd.app->add_option("--out", out_dir, "output directory");
    for (auto& flag : cmd.flags) flag.option = cmd.app->add_option(flag.name, flag.raw, flag.help);
  }

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.emplace_back("ratekit");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  Command* chosen = nullptr;
  for (auto& cmd : commands) {
    if (cmd.app->parsed()) chosen = &cmd;
  }
  Context ctx;
  ctx.out = &out;
  ctx.stage = "config";
  try {
    ctx.config = default_config();
    if (!config_path.empty()) {
      json user;
      try {
        user = json::parse(io::read_text(config_path));
      } catch (const json::parse_error& e) {
        throw InvalidInput("config json: " + std::string(e.what()));
      }
      ctx.config.merge_patch(user);
    }
    for (const auto& flag : chosen->flags) {
      if (flag.option->count() > 0) ctx.config[json::json_pointer(flag.pointer)] = parse_flag(flag);
    }
    if (!out_dir.empty()) ctx.config["output_dir"] = out_dir;
    ctx.config["command"] = chosen->name;
    const auto dir = cfg<std::string>(ctx, "/output_dir");
    if (dir.empty()) throw UsageError("missing required --out");
    ctx.out_dir = dir;
    fs::create_directories(ctx.out_dir);
    return chosen->run(ctx);
  } catch (const UsageError& e) {
    err << "error [" << chosen->name << "/" << ctx.stage << "]: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    err << "error [" << chosen->name << "/" << ctx.stage << "]: " << e.what() << "\n";
    return kNumericalError;
  } catch (const std::exception& e) {
    err << "error [" << chosen->name << "/" << ctx.stage << "]: " << e.what() << "\n";
    return kDataError;
  }
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace ratekit::cli
