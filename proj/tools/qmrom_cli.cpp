// qmrom: reduced-order models on a quadratic manifold, command line driver.

#include "qmrom/harness.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>

using namespace qmrom;

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

struct Options {
    std::string config;
    std::string out;
    std::vector<std::string> techniques;
    int steps = 0;
    unsigned seed = 0;
    std::string reference, candidate;
};

ExperimentConfig resolve(const Options& o) {
    ExperimentConfig cfg = load_config(o.config);
    if (o.steps > 0) cfg.steps = o.steps;
    if (!o.techniques.empty()) {
        cfg.techniques.clear();
        for (const auto& t : o.techniques) cfg.techniques.push_back(Technique::parse(t));
    }
    if (!o.out.empty()) cfg.output_dir = o.out;
    return cfg;
}

int cmd_modes(const Options& o) {
    const ExperimentSetup s = build_setup(resolve(o));
    std::cout << "dofs " << s.model->dofs() << "\n";
    std::cout << std::setw(6) << "mode" << std::setw(20) << "omega [rad/s]" << std::setw(20)
              << "f [Hz]" << std::setw(10) << "reduce" << "\n";
    for (Index k = 0; k < s.frequencies.size(); ++k) {
        const bool used = std::find(s.basis.indices.begin(), s.basis.indices.end(), k) !=
                          s.basis.indices.end();
        std::cout << std::setw(6) << k + 1 << std::setw(20) << format_g17(s.frequencies(k))
                  << std::setw(20) << format_g17(s.frequencies(k) / (2.0 * std::numbers::pi))
                  << std::setw(10) << (used ? "*" : "") << "\n";
    }
    return 0;
}

void print_derivatives(std::ostream& os, const ModalDerivativeSet& set, const ModalBasis& basis) {
    const std::string tag = to_string(set.kind);
    for (const auto& [i, j] : set.pairs()) {
        const Vector th = set.tensor.slice(i, j);
        os << tag << ' ' << basis.indices[i] + 1 << ' ' << basis.indices[j] + 1 << ' ' << th.size();
        for (Index d = 0; d < th.size(); ++d) os << ' ' << format_g17(th(d));
        os << '\n';
    }
    os << "# " << tag << " symmetry_residual " << format_g17(set.symmetry_residual()) << '\n';
}

int cmd_mds(const Options& o) {
    const ExperimentSetup s = build_setup(resolve(o));
    std::ofstream file;
    if (!o.out.empty()) {
        file.open(o.out, std::ios::binary);
        if (!file) throw InputError("cannot write '" + o.out + "'");
    }
    std::ostream& os = o.out.empty() ? std::cout : file;
    os << "# kind i j n values... (mode numbers are 1-based)\n";
    print_derivatives(os, modal_derivatives(*s.model, s.basis, DerivativeKind::smd), s.basis);
    print_derivatives(os, modal_derivatives(*s.model, s.basis, DerivativeKind::md), s.basis);
    return 0;
}

int cmd_select(const Options& o) {
    const ExperimentConfig cfg = resolve(o);
    const ExperimentSetup s = build_setup(cfg);
    LinearRunOptions lro;
    lro.zeta = cfg.linear_run_zeta;
    lro.beta = s.params.beta;
    lro.gamma = s.params.gamma;
    const ModalAmplitudeHistory hist =
        linear_modal_run(*s.model, s.basis, s.load, s.params.t_max, s.params.steps(), lro);

    std::vector<SelectionTechnique> which;
    for (const auto& t : cfg.techniques) {
        if (t.kind == TechniqueKind::lm_mmi) which.push_back(SelectionTechnique::mmi);
        if (t.kind == TechniqueKind::lm_mvw) which.push_back(SelectionTechnique::mvw);
    }
    if (which.empty()) which = {SelectionTechnique::mmi, SelectionTechnique::mvw};

    for (SelectionTechnique st : which) {
        const WeightMatrix W = st == SelectionTechnique::mmi ? mmi_weights(hist)
                                                             : mvw_weights(hist, *s.model, s.basis);
        const char* name = st == SelectionTechnique::mmi ? "MMI" : "MVW";
        const double wmax = W.W.cwiseAbs().maxCoeff();
        std::cout << name << " normalized weights\n" << std::setw(6) << "";
        for (Index j = 0; j < W.W.cols(); ++j) std::cout << std::setw(10) << s.basis.indices[j] + 1;
        std::cout << "\n";
        for (Index i = 0; i < W.W.rows(); ++i) {
            std::cout << std::setw(6) << s.basis.indices[i] + 1;
            for (Index j = 0; j < W.W.cols(); ++j) {
                std::cout << std::setw(10) << std::fixed << std::setprecision(4)
                          << (wmax > 0 ? W.W(i, j) / wmax : 0.0);
            }
            std::cout << "\n";
        }
        std::cout.unsetf(std::ios::floatfield);
        for (const auto& p : rank_all(W)) {
            std::cout << "rank " << name << ' ' << s.basis.indices[p.i] + 1 << ' '
                      << s.basis.indices[p.j] + 1 << ' ' << format_g17(p.weight) << "\n";
        }
    }
    return 0;
}

int cmd_run(const Options& o) {
    const ExperimentConfig cfg = resolve(o);
    if (cfg.techniques.empty()) throw InputError("config: no techniques requested");
    const ExperimentResult res = run_experiment(cfg);
    if (!cfg.output_dir.empty()) write_outputs(res, cfg.output_dir, cfg.write_velocities);
    std::cout << "load amplitude " << format_g17(res.report.load_amplitude) << ", max force ratio "
              << std::fixed << std::setprecision(3) << res.report.max_force_ratio << "\n";
    std::cout.unsetf(std::ios::floatfield);
    std::cout << res.report.table();
    for (const auto& r : res.report.rows) {
        if (!r.ok) std::cerr << r.technique.id() << ": " << r.error << "\n";
    }
    return 0;
}

int cmd_compare(const Options& o) {
    const ExperimentSetup s = build_setup(resolve(o));
    const Trajectory ref = read_trajectory_csv(o.reference);
    const Trajectory cand = read_trajectory_csv(o.candidate);
    if (ref.u.rows() != s.model->dofs()) throw InputError("reference CSV does not match the model");
    std::cout << "GRE_M " << std::fixed << std::setprecision(2)
              << gre_metric(ref, cand, s.model->mass()) << " %\n";
    return 0;
}

int cmd_calibrate(const Options& o) {
    const ExperimentConfig cfg = resolve(o);
    const ExperimentSetup s = build_setup(cfg);
    const CalibrationResult c = calibrate_load(*s.model, s.load, s.params, cfg.load.ratio_low,
                                               cfg.load.ratio_high);
    std::cout << "amplitude " << format_g17(c.amplitude) << "\nmax_force_ratio "
              << format_g17(c.max_ratio) << "\nruns " << c.attempts << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quadratic-manifold model order reduction for nonlinear structural dynamics"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--steps", o.steps, "override the number of time steps");
        sub->add_option("--seed", o.seed, "seed for randomized utilities (the pipeline is deterministic)");
    };

    auto* modes = app.add_subcommand("modes", "print natural frequencies and the reduction modes");
    common(modes);
    auto* mds = app.add_subcommand("mds", "print static and full modal derivatives");
    common(mds);
    mds->add_option("--out", o.out, "write records to this file");
    auto* select = app.add_subcommand("select", "MMI / MVW weight matrices and rankings");
    common(select);
    select->add_option("--technique", o.techniques, "lm_mmi and/or lm_mvw");
    auto* run = app.add_subcommand("run", "run an experiment and write its report");
    common(run);
    run->add_option("--out", o.out, "output directory");
    run->add_option("--technique", o.techniques, "technique to run (repeatable)");
    auto* compare = app.add_subcommand("compare", "GRE_M between two trajectory CSV files");
    common(compare);
    compare->add_option("reference", o.reference)->required()->check(CLI::ExistingFile);
    compare->add_option("candidate", o.candidate)->required()->check(CLI::ExistingFile);
    auto* calibrate = app.add_subcommand("calibrate", "scale the load to the target force ratio");
    common(calibrate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kConfigError;
    }

    try {
        if (*modes) return cmd_modes(o);
        if (*mds) return cmd_mds(o);
        if (*select) return cmd_select(o);
        if (*run) return cmd_run(o);
        if (*compare) return cmd_compare(o);
        if (*calibrate) return cmd_calibrate(o);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumericalError;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumericalError;
    }
    return 0;
}
