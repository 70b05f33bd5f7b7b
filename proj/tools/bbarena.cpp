// bbarena command line: train models, run single attacks or full sweeps,
// run the theory checks and summarize result CSVs.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bbarena/attacks/attacks.hpp"
#include "bbarena/harness/desk.hpp"
#include "bbarena/harness/experiment.hpp"
#include "bbarena/netmod/io.hpp"
#include "bbarena/netmod/train.hpp"
#include "bbarena/numkit/error.hpp"
#include "bbarena/numkit/kernels.hpp"
#include "bbarena/theorylab/theorylab.hpp"

using namespace bbarena;

namespace {

struct Output {
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file) throw std::runtime_error("cannot open '" + path + "' for writing");
        }
    }
    std::ostream& stream() { return file ? *file : std::cout; }
    std::unique_ptr<std::ofstream> file;
};

std::vector<std::size_t> parse_dims(const std::string& text) {
    std::vector<std::size_t> dims;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        dims.push_back(static_cast<std::size_t>(std::stoul(item)));
    }
    return dims;
}

struct TrainArgs {
    std::string data, out, init, hidden = "32,32", schedule = "constant";
    std::size_t epochs = 30, batch = 64;
    double lr = 0.05, augment_sigma = 0.0;
    std::uint64_t seed = 0;
};

int cmd_train(const TrainArgs& a) {
    const netmod::Dataset data = netmod::load_dataset_csv(a.data);
    netmod::MlpModel model = [&] {
        if (!a.init.empty()) return netmod::load_model(a.init);
        std::vector<std::size_t> dims{data.dim()};
        for (std::size_t h : parse_dims(a.hidden)) dims.push_back(h);
        dims.push_back(data.num_classes());
        return netmod::MlpModel::random(dims, a.seed);
    }();
    netmod::TrainConfig cfg;
    cfg.learning_rate = a.lr;
    cfg.epochs = a.epochs;
    cfg.batch_size = a.batch;
    cfg.augment_sigma = a.augment_sigma;
    cfg.seed = a.seed;
    cfg.schedule = netmod::parse_schedule(a.schedule);
    const netmod::TrainReport report = netmod::train(std::move(model), data, cfg);
    netmod::save_model(report.model, a.out);
    std::printf("trained %zu parameters, final loss %.6g, train accuracy %.4f -> %s\n",
                report.model.parameter_count(), report.epoch_losses.back(), report.train_accuracy,
                a.out.c_str());
    return 0;
}

struct BlobArgs {
    std::size_t d = 64, k = 4, n = 4096, fine_dims = 0;
    double separation = 0.5, spread = 0.1, center_margin = 0.15, fine_offset = 0.01, fine_spread = 0.002;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_blobs(const BlobArgs& a) {
    netmod::BlobOptions opts;
    opts.spread = a.spread;
    opts.center_margin = a.center_margin;
    opts.fine_dims = a.fine_dims;
    opts.fine_offset = a.fine_offset;
    opts.fine_spread = a.fine_spread;
    const auto data = netmod::make_blobs(a.d, a.k, a.n, a.separation, a.seed, opts);
    netmod::save_dataset_csv(data, a.out);
    std::printf("wrote %zu samples (d=%zu, K=%zu) -> %s\n", data.size(), data.dim(),
                data.num_classes(), a.out.c_str());
    return 0;
}

struct AttackArgs {
    std::string model, data, attack = "NES", norm = "linf", trace;
    std::size_t index = 0, budget = 10000, m = 1, q = 10;
    double radius = 0.05, mu = 1e-3, eta = 0.01, nu = 0.0;
    std::uint64_t seed = 0;
};

int cmd_attack(const AttackArgs& a) {
    const netmod::MlpModel model = netmod::load_model(a.model);
    const netmod::Dataset data = netmod::load_dataset_csv(a.data, model.num_classes());
    require(a.index < data.size(), "--index out of range");
    const Vector& x0 = data.input(a.index);
    const oracle::MarginOracle truth(model, data.label(a.index));
    oracle::DefendedOracle oracle(
        truth, oracle::DefensePolicy(a.nu, RngStream(a.seed, RngStream::stream_key({0xDEFEull, a.index}))),
        oracle::QueryLedger(a.budget));
    attacks::AttackConfig cfg;
    cfg.norm = parse_norm_kind(a.norm);
    cfg.radius = a.radius;
    cfg.mu = a.mu;
    cfg.eta = a.eta;
    cfg.max_queries = a.budget;
    cfg.samples_per_step = a.q;
    cfg.eot_m = a.m;
    cfg.seed = RngStream::stream_key({a.seed, a.index});
    attacks::AttackTrace trace;
    const auto kind = attacks::parse_attack_kind(a.attack);
    attacks::AttackOutcome out = attacks::run_attack(kind, oracle, x0, cfg, &trace);
    harness::score_outcome(out, truth);
    if (!a.trace.empty()) {
        std::ofstream t(a.trace);
        if (!t) throw std::runtime_error("cannot open '" + a.trace + "' for writing");
        trace.write_jsonl(t);
    }
    nlohmann::ordered_json j;
    j["attack"] = std::string(attacks::to_string(kind));
    j["clean_margin"] = truth.margin(x0);
    j["success"] = out.success;
    j["true_success"] = out.true_success;
    j["queries_used"] = out.queries_used;
    j["iterations"] = out.iterations;
    j["final_true_margin"] = out.final_true_margin;
    j["perturbation_norm"] = out.perturbation_norm;
    std::cout << j.dump(2) << '\n';
    return 0;
}

struct SweepArgs {
    std::string config, out, summary;
};

int cmd_sweep(const SweepArgs& a) {
    const harness::ExperimentSpec spec = harness::load_spec(a.config);
    const harness::ExperimentResult result = harness::run_experiment(spec);
    if (a.out.empty() || a.out == "-") harness::write_csv(std::cout, result.rows);
    else harness::write_csv(result.rows, a.out);
    if (!a.summary.empty()) {
        Output s(a.summary);
        s.stream() << harness::summarize(result.rows);
    }
    return 0;
}

int cmd_desk(const std::string& dir) {
    const harness::DeskFiles files = harness::prepare_desk(dir);
    std::printf("desk target: %s, %s (train accuracy %.4f)\n", files.dataset.string().c_str(),
                files.model.string().c_str(), files.train_accuracy);
    return 0;
}

int cmd_report(const std::string& csv) {
    std::cout << harness::summarize(harness::load_csv(csv));
    return 0;
}

struct FlipArgs {
    bool affine = false;
    std::vector<std::size_t> d{64};
    std::vector<double> mu{1e-3}, nu{0.02};
    std::size_t trials = 100000;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_flip(const FlipArgs& a) {
    Output out(a.out);
    theorylab::write_flip_csv_header(out.stream());
    for (std::size_t d : a.d) {
        RngStream setup(a.seed, RngStream::stream_key({0xF11Bull, d}));
        std::vector<double> c(d);
        setup.fill_normal(c);
        const auto f = theorylab::AnalyticOracle::affine(c, 0.0);
        const Vector x = Vector::filled(d, 0.5);
        const Vector u = sample_gaussian(setup, d);
        for (double mu : a.mu)
            for (double nu : a.nu) {
                RngStream rng(a.seed, RngStream::stream_key({0xF11Bull, d, 1}));
                const auto r = theorylab::flip_rate(f, x, mu, nu, u, a.trials, rng);
                theorylab::write_flip_csv_row(out.stream(), mu, nu, d, r);
            }
    }
    return 0;
}

struct ConvArgs {
    std::size_t d = 4, q = 400, trials = 10, samples = 10000, variance_samples = 20000;
    std::vector<double> alpha{0, 1, 5, 20};
    std::vector<std::size_t> m{1, 5, 10};
    double mu = 1e-3, eps = 0.01, radius = 1.0, eta = 0.0, curvature = 1.0, offset = 0.5;
    std::string step_rule = "theorem1", out, summary;
    std::uint64_t seed = 0;
};

theorylab::ConvergenceSweepConfig sweep_config(const ConvArgs& a) {
    theorylab::ConvergenceSweepConfig cfg;
    cfg.alpha_grid = a.alpha;
    cfg.mu = a.mu;
    cfg.iterations = a.q;
    cfg.epsilon = a.eps;
    cfg.radius = a.radius;
    cfg.trials = a.trials;
    cfg.smoothing_samples = a.samples;
    cfg.variance_samples = a.variance_samples;
    cfg.seed = a.seed;
    if (a.step_rule == "theorem1") {
        cfg.step_rule = theorylab::StepRule::Theorem1;
    } else if (a.step_rule == "constant") {
        cfg.step_rule = theorylab::StepRule::Constant;
        cfg.eta = a.eta;
    } else {
        throw ContractViolation("--step-rule must be theorem1 or constant");
    }
    return cfg;
}

// Bowl whose minimizer sits `offset` away from the start point (the origin).
std::pair<theorylab::AnalyticOracle, Vector> bowl_problem(std::size_t d, double curvature, double offset) {
    const Vector start = Vector::zeros(d);
    const Vector minimizer = Vector::filled(d, offset / std::sqrt(static_cast<double>(d)));
    return {theorylab::AnalyticOracle::bowl(minimizer, curvature), start};
}

void write_summary(std::ostream& out, const theorylab::ConvergenceResult& r) {
    out << "alpha,M,eta,mean_metric,std_error,estimator_variance\n";
    char buf[256];
    for (const auto& s : r.summary) {
        std::snprintf(buf, sizeof buf, "%.10g,%zu,%.10g,%.10g,%.10g,%.10g\n", s.alpha, s.eot_m, s.eta,
                      s.mean_metric, s.std_error, s.estimator_variance);
        out << buf;
    }
}

int cmd_convergence(const ConvArgs& a, bool eot) {
    const auto [f, start] = bowl_problem(a.d, a.curvature, a.offset);
    const auto cfg = sweep_config(a);
    const auto result = eot ? theorylab::eot_sweep(f, start, cfg, a.m)
                            : theorylab::convergence_sweep(f, start, cfg);
    Output out(a.out);
    if (eot) theorylab::write_eot_csv(out.stream(), result);
    else theorylab::write_convergence_csv(out.stream(), result);
    if (!a.summary.empty()) {
        Output s(a.summary);
        write_summary(s.stream(), result);
    }
    return 0;
}

struct SmoothArgs {
    std::size_t d = 20, k = 5, points = 100, samples = 20000;
    double nu = 0.05;
    std::uint64_t seed = 0;
};

int cmd_smoothing(const SmoothArgs& a) {
    RngStream setup(a.seed, RngStream::stream_key({0x5300ull, a.d}));
    std::vector<std::vector<double>> slopes(a.k, std::vector<double>(a.d));
    for (auto& c : slopes) setup.fill_normal(c);
    const auto f = theorylab::AnalyticOracle::piecewise_max(slopes);
    const NormBall region(Vector::filled(a.d, 0.5), 0.5, NormKind::LINF);
    RngStream rng(a.seed, RngStream::stream_key({0x5300ull, a.d, 1}));
    const auto g = theorylab::smoothing_gap_check(f, region, a.nu, a.points, a.samples, rng);
    std::printf("nu,d,points,max_gap,bound,worst_excess,violated\n%.10g,%zu,%zu,%.10g,%.10g,%.10g,%d\n",
                a.nu, a.d, g.points, g.max_gap, g.bound, g.worst_excess, g.violated ? 1 : 0);
    return g.violated ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Query-based black-box attacks against the random noise defense"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "bbarena 1.0 (kernels: " + std::string(kernels::active().name) + ")");

    TrainArgs train;
    auto* c_train = app.add_subcommand("train", "Train an MLP on a dataset CSV");
    c_train->add_option("--data", train.data, "dataset CSV")->required();
    c_train->add_option("--out", train.out, "model file to write")->required();
    c_train->add_option("--hidden", train.hidden, "hidden layer widths, comma separated");
    c_train->add_option("--init", train.init, "start from this model (fine-tuning)");
    c_train->add_option("--epochs", train.epochs);
    c_train->add_option("--lr", train.lr);
    c_train->add_option("--batch", train.batch);
    c_train->add_option("--augment-sigma", train.augment_sigma, "Gaussian augmentation scale");
    c_train->add_option("--schedule", train.schedule, "constant or cyclic");
    c_train->add_option("--seed", train.seed);

    BlobArgs blobs;
    auto* c_blobs = app.add_subcommand("blobs", "Generate a Gaussian-blob dataset CSV");
    c_blobs->add_option("--out", blobs.out)->required();
    c_blobs->add_option("--d", blobs.d);
    c_blobs->add_option("--k", blobs.k);
    c_blobs->add_option("--n", blobs.n);
    c_blobs->add_option("--separation", blobs.separation);
    c_blobs->add_option("--spread", blobs.spread);
    c_blobs->add_option("--center-margin", blobs.center_margin);
    c_blobs->add_option("--fine-dims", blobs.fine_dims);
    c_blobs->add_option("--fine-offset", blobs.fine_offset);
    c_blobs->add_option("--fine-spread", blobs.fine_spread);
    c_blobs->add_option("--seed", blobs.seed);

    AttackArgs attack;
    auto* c_attack = app.add_subcommand("attack", "Run one attack on one dataset sample");
    c_attack->add_option("--model", attack.model)->required();
    c_attack->add_option("--data", attack.data)->required();
    c_attack->add_option("--index", attack.index);
    c_attack->add_option("--attack", attack.attack, "NES, ZOSIGN, SIMBA, SQUARE or SIGNHUNTER");
    c_attack->add_option("--norm", attack.norm, "linf or l2");
    c_attack->add_option("--radius", attack.radius);
    c_attack->add_option("--mu", attack.mu);
    c_attack->add_option("--eta", attack.eta);
    c_attack->add_option("--nu", attack.nu, "defense noise scale");
    c_attack->add_option("--budget", attack.budget);
    c_attack->add_option("--m", attack.m, "EOT repeats");
    c_attack->add_option("--q", attack.q, "directions per gradient estimate");
    c_attack->add_option("--seed", attack.seed);
    c_attack->add_option("--trace", attack.trace, "write a JSON-lines trace here");

    SweepArgs sweep;
    auto* c_sweep = app.add_subcommand("sweep", "Run an experiment config and write the CSV");
    c_sweep->add_option("--config", sweep.config)->required();
    c_sweep->add_option("--out", sweep.out, "CSV path (default stdout)");
    c_sweep->add_option("--summary", sweep.summary, "also write the text summary here");

    std::string desk_dir;
    auto* c_desk = app.add_subcommand("desk", "Write the desk-scale blobs dataset and trained MLP");
    c_desk->add_option("--out", desk_dir, "output directory")->required();

    std::string report_csv;
    auto* c_report = app.add_subcommand("report", "Print a summary table of a sweep CSV");
    c_report->add_option("csv", report_csv)->required();

    auto* c_theory = app.add_subcommand("theory", "Monte Carlo checks on analytic objectives");
    c_theory->require_subcommand(1);

    FlipArgs flip;
    auto* c_flip = c_theory->add_subcommand("flip-rate", "Sign-flip frequency versus its bound");
    c_flip->add_flag("--affine", flip.affine, "affine objective (the only kind offered)")->required();
    c_flip->add_option("--d", flip.d)->delimiter(',');
    c_flip->add_option("--mu", flip.mu)->delimiter(',');
    c_flip->add_option("--nu", flip.nu)->delimiter(',');
    c_flip->add_option("--trials", flip.trials);
    c_flip->add_option("--seed", flip.seed);
    c_flip->add_option("--out", flip.out);

    ConvArgs conv;
    auto add_conv = [&](CLI::App* c) {
        c->add_option("--d", conv.d);
        c->add_option("--alpha", conv.alpha)->delimiter(',');
        c->add_option("--mu", conv.mu);
        c->add_option("--q", conv.q, "iterations");
        c->add_option("--eps", conv.eps);
        c->add_option("--radius", conv.radius);
        c->add_option("--step-rule", conv.step_rule, "theorem1 or constant");
        c->add_option("--eta", conv.eta, "step for --step-rule constant");
        c->add_option("--curvature", conv.curvature);
        c->add_option("--offset", conv.offset, "distance from the start point to the minimizer");
        c->add_option("--trials", conv.trials);
        c->add_option("--samples", conv.samples, "smoothing samples per point");
        c->add_option("--seed", conv.seed);
        c->add_option("--out", conv.out);
        c->add_option("--summary", conv.summary);
    };
    auto* c_conv = c_theory->add_subcommand("convergence", "ZO descent on a quadratic bowl per alpha");
    add_conv(c_conv);
    auto* c_eot = c_theory->add_subcommand("eot", "Convergence sweep repeated per EOT M");
    add_conv(c_eot);
    c_eot->add_option("--m", conv.m)->delimiter(',');
    c_eot->add_option("--variance-samples", conv.variance_samples);

    SmoothArgs smooth;
    auto* c_smooth = c_theory->add_subcommand("smoothing", "Smoothing gap on a piecewise-max objective");
    c_smooth->add_option("--d", smooth.d);
    c_smooth->add_option("--k", smooth.k);
    c_smooth->add_option("--nu", smooth.nu);
    c_smooth->add_option("--points", smooth.points);
    c_smooth->add_option("--samples", smooth.samples);
    c_smooth->add_option("--seed", smooth.seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*c_train) return cmd_train(train);
        if (*c_blobs) return cmd_blobs(blobs);
        if (*c_attack) return cmd_attack(attack);
        if (*c_sweep) return cmd_sweep(sweep);
        if (*c_desk) return cmd_desk(desk_dir);
        if (*c_report) return cmd_report(report_csv);
        if (*c_flip) return cmd_flip(flip);
        if (*c_conv) return cmd_convergence(conv, false);
        if (*c_eot) return cmd_convergence(conv, true);
        if (*c_smooth) return cmd_smoothing(smooth);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
