// rdlens: calibrate the toy process, train models against rate-distortion
// objectives, sweep the RD plane, and emit plot data. Every command writes a
// run manifest holding its fully resolved configuration; `rdlens rerun`
// re-executes a manifest and reproduces the outputs byte for byte.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rdlens/analysis.hpp"
#include "rdlens/gradient.hpp"
#include "rdlens/io.hpp"
#include "rdlens/model.hpp"
#include "rdlens/objectives.hpp"
#include "rdlens/prob.hpp"
#include "rdlens/sweep.hpp"
#include "rdlens/toy_process.hpp"
#include "rdlens/trainer.hpp"

namespace {

using nlohmann::json;
using namespace rdlens;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCalibration = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitSchema = 4;
constexpr int kExitInvariant = 5;

constexpr const char* kManifestSchema = "runmanifest-v1";

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

json toolchain_fingerprint() {
  return json{{"compiler", __VERSION__}, {"cxx_standard", static_cast<long>(__cplusplus)}};
}

void write_manifest(const std::filesystem::path& path, const std::string& command,
                    const json& config, const json& inputs, const json& outputs,
                    double wall_time_s) {
  json m{{"schema", kManifestSchema},
         {"command", command},
         {"config", config},
         {"inputs", inputs},
         {"outputs", outputs},
         {"schema_versions",
          {{"toyprocess", kToyProcessSchema},
           {"modelparams", kModelParamsSchema},
           {"fig2", kFig2Schema}}},
         {"wall_time_s", wall_time_s},
         {"toolchain", toolchain_fingerprint()}};
  atomic_write_file(path, m.dump(2) + "\n");
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("RD_LENS_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw InvalidConfig("RD_LENS_SEED is not an unsigned integer");
    }
  }
  return 0;
}

AnnealSchedule parse_anneal(const std::string& s) {
  AnnealSchedule a;
  if (std::sscanf(s.c_str(), "%lf:%lf:%zu:%zu", &a.w_start, &a.w_end, &a.step_start,
                  &a.step_end) != 4)
    throw InvalidConfig("anneal: expected w_start:w_end:step_start:step_end, got '" + s +
                        "'");
  return a;
}

json train_config_to_json(const TrainConfig& cfg) {
  json j{{"objective", to_string(cfg.objective)},
         {"steps", cfg.steps},
         {"learning_rate", cfg.learning_rate},
         {"lr_decay_from", cfg.lr_decay_from},
         {"adam_beta1", cfg.adam_beta1},
         {"adam_beta2", cfg.adam_beta2},
         {"adam_eps", cfg.adam_eps},
         {"seed", cfg.seed},
         {"init_scale", cfg.init_scale},
         {"latent_k", cfg.latent_k},
         {"log_every", cfg.log_every},
         {"grad_normalize", cfg.grad_normalize},
         {"qx", to_string(cfg.qx)}};
  if (cfg.anneal)
    j["anneal"] = json::array({cfg.anneal->w_start, cfg.anneal->w_end,
                               cfg.anneal->step_start, cfg.anneal->step_end});
  else
    j["anneal"] = nullptr;
  return j;
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig cfg;
  cfg.objective = parse_objective(j.at("objective").get<std::string>());
  cfg.steps = j.at("steps").get<std::size_t>();
  cfg.learning_rate = j.at("learning_rate").get<double>();
  cfg.lr_decay_from = j.at("lr_decay_from").get<std::size_t>();
  cfg.adam_beta1 = j.at("adam_beta1").get<double>();
  cfg.adam_beta2 = j.at("adam_beta2").get<double>();
  cfg.adam_eps = j.at("adam_eps").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.init_scale = j.at("init_scale").get<double>();
  cfg.latent_k = j.at("latent_k").get<std::size_t>();
  cfg.log_every = j.at("log_every").get<std::size_t>();
  cfg.grad_normalize = j.at("grad_normalize").get<bool>();
  cfg.qx = parse_qx_choice(j.at("qx").get<std::string>());
  if (!j.at("anneal").is_null()) {
    const auto& a = j.at("anneal");
    cfg.anneal = AnnealSchedule{a.at(0).get<double>(), a.at(1).get<double>(),
                                a.at(2).get<std::size_t>(), a.at(3).get<std::size_t>()};
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// command bodies: a resolved config plus input paths in, files plus manifest
// out. `rerun` calls these directly from a stored manifest.

int do_calibrate(const json& cfg, const std::filesystem::path& out) {
  Timer timer;
  ToyGeometry geom;
  geom.p1 = cfg.at("p1").get<double>();
  geom.mu = {cfg.at("mu0").get<double>(), cfg.at("mu1").get<double>()};
  geom.bin_count = cfg.at("bins").get<std::size_t>();
  geom.span_lo = cfg.at("span_lo").get<double>();
  geom.span_hi = cfg.at("span_hi").get<double>();

  auto [tp, rep] = calibrate_noise(cfg.at("target_mi").get<double>(), geom,
                                   cfg.at("bracket_lo").get<double>(),
                                   cfg.at("bracket_hi").get<double>(),
                                   cfg.at("tol").get<double>());
  save_toy_process(tp, out, &rep);
  std::cout << "calibrated sigma=" << fmt_double(rep.sigma)
            << " achieved_mi=" << fmt_double(rep.achieved_mi) << " iterations="
            << rep.iterations << "\n";

  write_manifest(out.string() + ".manifest.json", "calibrate", cfg, json::object(),
                 json{{"process", out.string()}}, timer.seconds());
  return kExitOk;
}

int do_train(const json& cfg, const std::filesystem::path& process_path,
             const std::string& prefix) {
  Timer timer;
  ToyProcess tp = load_toy_process(process_path);
  TrainConfig tc = train_config_from_json(cfg);
  tc.validate();

  TrainTrace trace = train(tc, tp);

  const std::filesystem::path ck_path = prefix + ".checkpoint.json";
  const std::filesystem::path trace_path = prefix + ".trace.csv";
  const std::filesystem::path bounds_path = prefix + ".bounds.csv";

  save_checkpoint(Checkpoint{trace.final_params, tc.seed, tc.objective}, ck_path);

  std::string trace_csv = trace_csv_header();
  for (const TraceRecord& rec : trace.records) trace_csv += trace_csv_row(rec);
  atomic_write_file(trace_path, trace_csv);

  atomic_write_file(bounds_path,
                    bounds_csv_header() +
                        bounds_csv_row(tc.objective, tc.seed, trace.final_report));

  const BoundsReport& rep = trace.final_report;
  std::cout << "final R=" << fmt_double(rep.r) << " D=" << fmt_double(rep.d)
            << " elbo=" << fmt_double(rep.elbo) << " (" << to_string(rep.feas) << ")\n";

  write_manifest(prefix + ".manifest.json", "train", cfg,
                 json{{"process", process_path.string()}},
                 json{{"checkpoint", ck_path.string()},
                      {"trace", trace_path.string()},
                      {"bounds", bounds_path.string()}},
                 timer.seconds());
  return kExitOk;
}

int do_sweep(const json& cfg, const std::filesystem::path& process_path,
             const std::string& prefix) {
  Timer timer;
  ToyProcess tp = load_toy_process(process_path);

  SweepSpec spec;
  const std::string family = cfg.at("family").get<std::string>();
  spec.family =
      family == "beta" ? Objective::Kind::Beta : Objective::Kind::TargetRate;
  if (family != "beta" && family != "target-rate")
    throw InvalidConfig("sweep: unknown objective family '" + family + "'");
  spec.grid = cfg.at("grid").get<std::vector<double>>();
  spec.seeds = cfg.at("seeds").get<std::size_t>();
  spec.jobs = cfg.at("jobs").get<std::size_t>();
  spec.base = train_config_from_json(cfg.at("base"));
  spec.validate();

  std::vector<RDPoint> points = run_sweep(spec, tp);

  std::string points_csv = points_csv_header();
  for (const RDPoint& p : points) points_csv += points_csv_row(p);
  const std::filesystem::path points_path = prefix + ".points.csv";
  atomic_write_file(points_path, points_csv);

  Frontier frontier = pareto_frontier(points);
  const std::filesystem::path frontier_path = prefix + ".frontier.csv";
  atomic_write_file(frontier_path, frontier_csv(frontier));

  std::size_t diverged = 0;
  for (const RDPoint& p : points)
    if (!p.converged) ++diverged;
  std::cout << "swept " << points.size() << " cells (" << diverged << " diverged), pareto "
            << frontier.pareto.size() << ", hull " << frontier.hull.size() << "\n";

  write_manifest(prefix + ".manifest.json", "sweep", cfg,
                 json{{"process", process_path.string()}},
                 json{{"points", points_path.string()},
                      {"frontier", frontier_path.string()}},
                 timer.seconds());
  return kExitOk;
}

Model model_from_eval_config(const json& cfg, const ToyProcess& tp,
                             const std::filesystem::path& checkpoint_path,
                             Objective* obj_out, std::uint64_t* seed_out) {
  if (cfg.at("reference").get<bool>()) {
    *obj_out = Objective{Objective::Kind::Beta, 1.0};
    *seed_out = 0;
    return optimal_reference(tp, cfg.at("latent_k").get<std::size_t>());
  }
  Checkpoint ck = load_checkpoint(checkpoint_path);
  *obj_out = ck.objective;
  *seed_out = ck.seed;
  return realize(ck.params, tp.bin_centers());
}

int do_eval(const json& cfg, const std::filesystem::path& process_path,
            const std::filesystem::path& checkpoint_path, const std::string& prefix) {
  Timer timer;
  ToyProcess tp = load_toy_process(process_path);
  Objective obj;
  std::uint64_t seed = 0;
  Model model = model_from_eval_config(cfg, tp, checkpoint_path, &obj, &seed);

  Fig2Report fig = fig2(tp, model);
  const std::filesystem::path fig_path = prefix + ".fig2.json";
  const std::filesystem::path enc_path = prefix + ".encoder.csv";
  const std::filesystem::path dec_path = prefix + ".decoder.csv";
  const std::filesystem::path xfer_path = prefix + ".xfer.csv";
  atomic_write_file(fig_path, to_json(fig).dump(2) + "\n");
  atomic_write_file(enc_path, matrix_csv(model.encoder));
  atomic_write_file(dec_path, matrix_csv(model.decoder));
  atomic_write_file(xfer_path, matrix_csv(fig.xfer));

  std::cout << "kl_p_g=" << fmt_double(fig.kl_p_g)
            << " purity=" << fmt_double(fig.cluster.purity) << " masses=("
            << fmt_double(fig.cluster.mass_per_class[0]) << ","
            << fmt_double(fig.cluster.mass_per_class[1]) << ")\n";

  json inputs{{"process", process_path.string()}};
  if (!cfg.at("reference").get<bool>()) inputs["checkpoint"] = checkpoint_path.string();
  write_manifest(prefix + ".manifest.json", "eval", cfg, inputs,
                 json{{"fig2", fig_path.string()},
                      {"encoder", enc_path.string()},
                      {"decoder", dec_path.string()},
                      {"xfer", xfer_path.string()}},
                 timer.seconds());
  return kExitOk;
}

int do_oracle(const json& cfg, const std::filesystem::path& process_path,
              const std::filesystem::path& checkpoint_path, const std::string& prefix) {
  Timer timer;
  ToyProcess tp = load_toy_process(process_path);
  Objective obj;
  std::uint64_t seed = 0;

  BoundsReport rep;
  if (cfg.at("reference").get<bool>()) {
    Model model = model_from_eval_config(cfg, tp, checkpoint_path, &obj, &seed);
    rep = evaluate_bounds(tp.data_marginal(), model);
  } else {
    Checkpoint ck = load_checkpoint(checkpoint_path);
    obj = ck.objective;
    seed = ck.seed;
    rep = evaluate_params_bounds(ck.params, tp.data_marginal(), tp.bin_centers());
  }

  std::cout << "H=" << fmt_double(rep.h) << "\nD=" << fmt_double(rep.d)
            << "\nR=" << fmt_double(rep.r) << "\nelbo=" << fmt_double(rep.elbo)
            << "\nI_rep=" << fmt_double(rep.i_rep) << "\nE=" << fmt_double(rep.e)
            << "\nG=" << fmt_double(rep.g) << "\nI_gen=" << fmt_double(rep.i_gen)
            << "\nU=" << fmt_double(rep.u) << "\nS=" << fmt_double(rep.s)
            << "\nfeasibility=" << to_string(rep.feas) << "\n";

  std::vector<std::string> violations;
  const double tol = 1e-9;
  if (!(rep.h - rep.d <= rep.i_rep + tol)) violations.push_back("H - D <= I_rep");
  if (!(rep.i_rep <= rep.r + tol)) violations.push_back("I_rep <= R");
  if (!(rep.e <= rep.i_gen + tol)) violations.push_back("E <= I_gen");
  if (!(rep.i_gen <= rep.g + tol)) violations.push_back("I_gen <= G");
  if (std::isfinite(rep.u) && std::isfinite(rep.s) &&
      !(std::abs((rep.u - rep.s) - (rep.h - rep.d)) <= tol))
    violations.push_back("U - S = H - D");
  if (!(std::abs(rep.elbo + rep.d + rep.r) <= tol)) violations.push_back("elbo = -(D+R)");
  if (rep.feas == Feasibility::Infeasible) violations.push_back("feasibility");

  if (!prefix.empty()) {
    const std::filesystem::path bounds_path = prefix + ".bounds.csv";
    atomic_write_file(bounds_path, bounds_csv_header() + bounds_csv_row(obj, seed, rep));
    json inputs{{"process", process_path.string()}};
    if (!cfg.at("reference").get<bool>()) inputs["checkpoint"] = checkpoint_path.string();
    write_manifest(prefix + ".manifest.json", "oracle", cfg, inputs,
                   json{{"bounds", bounds_path.string()}}, timer.seconds());
  }

  if (!violations.empty()) {
    for (const std::string& v : violations)
      std::cerr << "invariant violated: " << v << "\n";
    return kExitInvariant;
  }
  std::cout << "all sandwich invariants hold\n";
  return kExitOk;
}

int do_rerun(const std::filesystem::path& manifest_path, const std::string& prefix) {
  json m = json::parse(read_file(manifest_path));
  if (!m.contains("schema") || m["schema"] != kManifestSchema)
    throw SchemaError("rerun: expected schema " + std::string(kManifestSchema));
  const std::string command = m.at("command").get<std::string>();
  const json cfg = m.at("config");
  const json inputs = m.at("inputs");

  if (command == "calibrate") return do_calibrate(cfg, prefix + ".toyprocess.json");
  if (command == "train")
    return do_train(cfg, inputs.at("process").get<std::string>(), prefix);
  if (command == "sweep")
    return do_sweep(cfg, inputs.at("process").get<std::string>(), prefix);
  if (command == "eval" || command == "oracle") {
    const std::string ck =
        inputs.contains("checkpoint") ? inputs.at("checkpoint").get<std::string>() : "";
    if (command == "eval")
      return do_eval(cfg, inputs.at("process").get<std::string>(), ck, prefix);
    return do_oracle(cfg, inputs.at("process").get<std::string>(), ck, prefix);
  }
  throw SchemaError("rerun: unknown command '" + command + "' in manifest");
}

// shared train/sweep tuning flags
struct TrainFlags {
  std::string objective = "beta:1.0";
  std::size_t steps = 20000;
  double lr = 1.5e-3;
  std::size_t lr_decay_from = 12000;
  double adam_beta1 = 0.9, adam_beta2 = 0.999, adam_eps = 1e-4;
  double init_scale = 0.01;
  std::size_t latent_k = 30;
  std::size_t log_every = 100;
  bool grad_normalize = false;
  bool no_anneal = false;
  std::string anneal;  // w_start:w_end:step_start:step_end
  std::string qx = "generative";
  std::uint64_t seed = 0;
  bool seed_given = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--objective", objective, "beta:<b> or target-rate:<sigma>");
    cmd->add_option("--steps", steps, "full-batch update count");
    cmd->add_option("--lr", lr, "Adam learning rate");
    cmd->add_option("--lr-decay-from", lr_decay_from,
                    "step after which the learning rate decays linearly to 0");
    cmd->add_option("--adam-beta1", adam_beta1);
    cmd->add_option("--adam-beta2", adam_beta2);
    cmd->add_option("--adam-eps", adam_eps);
    cmd->add_option("--init-scale", init_scale, "initialization scale");
    cmd->add_option("--latent-k", latent_k, "latent alphabet size");
    cmd->add_option("--log-every", log_every, "trace record interval");
    cmd->add_flag("--grad-normalize", grad_normalize,
                  "divide each gradient by its global norm");
    cmd->add_option("--anneal", anneal,
                    "rate-weight schedule w_start:w_end:step_start:step_end");
    cmd->add_flag("--no-anneal", no_anneal, "disable the default anneal schedule");
    cmd->add_option("--qx", qx, "variational data marginal: generative|data|uniform");
    cmd->add_option("--seed", seed, "RNG seed (default: RD_LENS_SEED or 0)")
        ->each([this](const std::string&) { seed_given = true; });
  }

  TrainConfig resolve() const {
    Objective obj = parse_objective(objective);
    TrainConfig cfg = make_default_config(obj);
    cfg.steps = steps;
    cfg.learning_rate = lr;
    cfg.lr_decay_from = lr_decay_from;
    cfg.adam_beta1 = adam_beta1;
    cfg.adam_beta2 = adam_beta2;
    cfg.adam_eps = adam_eps;
    cfg.init_scale = init_scale;
    cfg.latent_k = latent_k;
    cfg.log_every = log_every;
    cfg.grad_normalize = grad_normalize;
    cfg.qx = parse_qx_choice(qx);
    cfg.seed = seed_given ? seed : default_seed();
    if (!anneal.empty())
      cfg.anneal = parse_anneal(anneal);
    else if (no_anneal)
      cfg.anneal.reset();
    else if (cfg.anneal)  // default schedule scales with the step budget
      cfg.anneal = AnnealSchedule{1.0, 1.25, steps * 2 / 5, steps / 2};
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rate-distortion lens for discrete latent-variable toy models"};
  app.require_subcommand(1);

  // calibrate
  auto* c_cal = app.add_subcommand("calibrate", "bisect the noise to a target I(x;z*)");
  double target_mi = 0.5, p1 = 0.3, mu0 = -1.0, mu1 = 1.0;
  double span_lo = -7.0, span_hi = 7.0, cal_tol = 1e-6, bracket_lo = 0.02, bracket_hi = 20.0;
  std::size_t bins = 30;
  std::string cal_out;
  c_cal->add_option("--target-mi", target_mi, "target mutual information, nats");
  c_cal->add_option("--p1", p1, "probability of latent class 1");
  c_cal->add_option("--mu0", mu0);
  c_cal->add_option("--mu1", mu1);
  c_cal->add_option("--bins", bins);
  c_cal->add_option("--span-lo", span_lo);
  c_cal->add_option("--span-hi", span_hi);
  c_cal->add_option("--tol", cal_tol, "bisection tolerance, nats");
  c_cal->add_option("--bracket-lo", bracket_lo);
  c_cal->add_option("--bracket-hi", bracket_hi);
  c_cal->add_option("--out", cal_out, "output toyprocess-v1 path")->required();

  // train
  auto* c_train = app.add_subcommand("train", "optimize one model");
  std::string train_process, train_prefix;
  TrainFlags train_flags;
  c_train->add_option("--process", train_process, "toyprocess-v1 path")->required();
  c_train->add_option("--out-prefix", train_prefix)->required();
  train_flags.add_to(c_train);

  // sweep
  auto* c_sweep = app.add_subcommand("sweep", "train a grid of objective values x seeds");
  std::string sweep_process, sweep_prefix, sweep_family = "beta";
  std::vector<double> sweep_grid;
  std::size_t sweep_seeds = 3, sweep_jobs = 1;
  TrainFlags sweep_flags;
  c_sweep->add_option("--process", sweep_process)->required();
  c_sweep->add_option("--out-prefix", sweep_prefix)->required();
  c_sweep->add_option("--objective-family", sweep_family, "beta or target-rate");
  c_sweep->add_option("--grid", sweep_grid, "ascending objective values")
      ->required()
      ->delimiter(',');
  c_sweep->add_option("--seeds", sweep_seeds, "seeds per grid value");
  c_sweep->add_option("--jobs", sweep_jobs, "worker pool width");
  sweep_flags.add_to(c_sweep);

  // eval
  auto* c_eval = app.add_subcommand("eval", "derived distributions of a checkpoint");
  std::string eval_process, eval_ck, eval_prefix;
  bool eval_ref = false;
  std::size_t eval_k = 30;
  c_eval->add_option("--process", eval_process)->required();
  c_eval->add_option("--checkpoint", eval_ck, "modelparams-v1 path");
  c_eval->add_flag("--optimal-reference", eval_ref,
                   "evaluate the hand-constructed reference model instead");
  c_eval->add_option("--latent-k", eval_k, "latent size for --optimal-reference");
  c_eval->add_option("--out-prefix", eval_prefix)->required();

  // oracle
  auto* c_oracle = app.add_subcommand("oracle", "recompute and audit every bound");
  std::string or_process, or_ck, or_prefix;
  bool or_ref = false;
  std::size_t or_k = 30;
  c_oracle->add_option("--process", or_process)->required();
  c_oracle->add_option("--checkpoint", or_ck);
  c_oracle->add_flag("--optimal-reference", or_ref);
  c_oracle->add_option("--latent-k", or_k);
  c_oracle->add_option("--out-prefix", or_prefix, "optional audit-row output prefix");

  // rerun
  auto* c_rerun = app.add_subcommand("rerun", "re-execute a manifest");
  std::string rerun_manifest, rerun_prefix;
  c_rerun->add_option("--manifest", rerun_manifest)->required();
  c_rerun->add_option("--out-prefix", rerun_prefix)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c_cal->parsed()) {
      json cfg{{"target_mi", target_mi}, {"p1", p1},
               {"mu0", mu0},             {"mu1", mu1},
               {"bins", bins},           {"span_lo", span_lo},
               {"span_hi", span_hi},     {"tol", cal_tol},
               {"bracket_lo", bracket_lo}, {"bracket_hi", bracket_hi}};
      return do_calibrate(cfg, cal_out);
    }
    if (c_train->parsed()) {
      TrainConfig cfg = train_flags.resolve();
      cfg.validate();
      return do_train(train_config_to_json(cfg), train_process, train_prefix);
    }
    if (c_sweep->parsed()) {
      TrainConfig base = sweep_flags.resolve();
      json cfg{{"family", sweep_family},
               {"grid", sweep_grid},
               {"seeds", sweep_seeds},
               {"jobs", sweep_jobs},
               {"base", train_config_to_json(base)}};
      return do_sweep(cfg, sweep_process, sweep_prefix);
    }
    if (c_eval->parsed()) {
      if (eval_ref == eval_ck.empty() && !eval_ref)
        throw InvalidConfig("eval: need --checkpoint or --optimal-reference");
      json cfg{{"reference", eval_ref}, {"latent_k", eval_k}};
      return do_eval(cfg, eval_process, eval_ck, eval_prefix);
    }
    if (c_oracle->parsed()) {
      if (!or_ref && or_ck.empty())
        throw InvalidConfig("oracle: need --checkpoint or --optimal-reference");
      json cfg{{"reference", or_ref}, {"latent_k", or_k}};
      return do_oracle(cfg, or_process, or_ck, or_prefix);
    }
    if (c_rerun->parsed()) return do_rerun(rerun_manifest, rerun_prefix);
  } catch (const BracketFailure& e) {
    std::cerr << "calibration failed: " << e.what() << "\n";
    return kExitCalibration;
  } catch (const DivergedLoss& e) {
    std::cerr << "training diverged: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const SchemaError& e) {
    std::cerr << "schema mismatch: " << e.what() << "\n";
    return kExitSchema;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "malformed input: " << e.what() << "\n";
    return kExitSchema;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
