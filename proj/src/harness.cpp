#include "qmrom/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace qmrom {

namespace {

using ordered_json = nlohmann::ordered_json;

Vector spatial_vector(const ExperimentConfig& cfg, const StructuralModel& model,
                      const VonKarmanBeam* beam) {
    const auto& l = cfg.load;
    switch (l.spatial) {
        case LoadConfig::Spatial::uniform_transverse:
            if (!beam) throw InputError("config: uniform_transverse load needs the vk_beam model");
            return beam->uniform_transverse_load();
        case LoadConfig::Spatial::nodes:
            if (!beam) throw InputError("config: node loads need the vk_beam model");
            return beam->point_transverse_load(l.nodes);
        case LoadConfig::Spatial::vector: {
            if (static_cast<Index>(l.vector.size()) != model.dofs()) {
                throw InputError("config: load.spatial.vector length must equal the DOF count");
            }
            return Eigen::Map<const Vector>(l.vector.data(), model.dofs());
        }
    }
    return {};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

ExperimentSetup build_setup(const ExperimentConfig& cfg) {
    ExperimentSetup s;
    ModelPtr base;
    if (cfg.model_type == "vk_beam") {
        s.beam = von_karman_beam(cfg.beam);
        base = s.beam;
    } else {
        base = two_dof_model(cfg.two_dof);
    }

    const Index n_freq = std::min<Index>(base->dofs(), 8);
    const EigenPairs low = sym_generalized_eig(base->linear_stiffness(), base->mass(), n_freq);
    s.frequencies = low.values.cwiseSqrt();

    if (cfg.damping.rayleigh) {
        const int hi = std::max(cfg.damping.mode_a, cfg.damping.mode_b);
        if (hi > n_freq) throw InputError("config: damping.modes exceed the available modes");
        const double w1 = s.frequencies(cfg.damping.mode_a - 1);
        const double w2 = s.frequencies(cfg.damping.mode_b - 1);
        s.rayleigh = rayleigh_coefficients(cfg.damping.zeta, w1, w2);
        s.model = std::make_shared<DampedModel>(
            base, rayleigh_damping(base->mass(), base->linear_stiffness(), cfg.damping.zeta, w1, w2));
    } else {
        s.model = base;
    }

    s.load.kind = cfg.load.kind;
    s.load.amplitude = cfg.load.amplitude;
    s.load.samples = cfg.load.samples;
    s.load.sample_dt = cfg.load.sample_dt;
    s.load.spatial = spatial_vector(cfg, *s.model, s.beam.get());
    switch (cfg.load.omega_rule) {
        case OmegaRule::first_eig: s.load.omega = s.frequencies(0); break;
        case OmegaRule::mean_first_two:
            if (s.frequencies.size() < 2) throw InputError("config: mean_first_two needs two modes");
            s.load.omega = 0.5 * (s.frequencies(0) + s.frequencies(1));
            break;
        case OmegaRule::value: s.load.omega = cfg.load.omega; break;
    }
    validate(s.load, s.model->dofs());

    if (!cfg.modes.empty()) {
        s.basis = vibration_modes(*s.model, cfg.modes);
    } else if (cfg.load_participating) {
        s.basis = vibration_modes(*s.model,
                                  load_participating_modes(*s.model, s.load.spatial, cfg.m));
    } else {
        s.basis = vibration_modes(*s.model, cfg.m);
    }

    const double t_max = cfg.t_max ? *cfg.t_max : cfg.periods * 2.0 * std::numbers::pi / s.load.omega;
    s.params = IntegratorParams::uniform(t_max, cfg.steps);
    s.params.beta = cfg.beta;
    s.params.gamma = cfg.gamma;
    s.params.epsilon = cfg.epsilon;
    s.params.max_iterations = cfg.max_iterations;
    s.params.validate();
    return s;
}

double gre_metric(const Trajectory& full, const Trajectory& reduced, const Matrix& M,
                  const std::vector<Index>& samples) {
    if (full.u.rows() != reduced.u.rows() || full.u.cols() != reduced.u.cols()) {
        throw InputError("gre_metric: trajectories have different shapes");
    }
    if (full.times.size() == reduced.times.size() &&
        (full.times - reduced.times).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + full.times.cwiseAbs().maxCoeff())) {
        throw InputError("gre_metric: time grids differ");
    }
    std::vector<Index> S = samples;
    if (S.empty()) {
        for (Index k = 1; k < full.u.cols(); ++k) S.push_back(k);
    }
    double num = 0.0, den = 0.0;
    for (Index k : S) {
        if (k < 0 || k >= full.u.cols()) throw InputError("gre_metric: sample index out of range");
        const Vector e = full.u.col(k) - reduced.u.col(k);
        num += e.dot(M * e);
        den += full.u.col(k).dot(M * full.u.col(k));
    }
    if (!(den > 0.0)) throw InputError("gre_metric: reference solution vanishes on the sample set");
    return 100.0 * std::sqrt(num) / std::sqrt(den);
}

ForceBalance force_balance_report(const StructuralModel& model, const Trajectory& traj) {
    const Index cols = traj.u.cols();
    if (cols == 0) throw InputError("force_balance_report: empty trajectory");
    ForceBalance fb;
    fb.linear.resize(cols);
    fb.nonlinear.resize(cols);
    fb.ratio.resize(cols);
    for (Index k = 0; k < cols; ++k) {
        const Vector u = traj.u.col(k);
        const Vector ku = model.linear_stiffness() * u;
        fb.linear(k) = ku.norm();
        fb.nonlinear(k) = (model.internal_force(u) - ku).norm();
        fb.ratio(k) = fb.linear(k) > 0.0 ? fb.nonlinear(k) / fb.linear(k) : 0.0;
    }
    fb.max_ratio = fb.ratio.maxCoeff();
    return fb;
}

CalibrationResult calibrate_load(const StructuralModel& model, const LoadCase& load,
                                 const IntegratorParams& params, double low, double high,
                                 int max_attempts) {
    if (load.amplitude == 0.0) throw InputError("calibration needs a nonzero starting amplitude");
    const double step = std::log(std::sqrt(10.0));
    const double target = std::log(std::sqrt(low * high));
    LoadCase trial = load;
    CalibrationResult res;
    double lo_a = 0.0, hi_a = 0.0;  // log|amplitude| bracket, valid when both set
    bool have_lo = false, have_hi = false;
    double log_a = std::log(std::abs(load.amplitude));
    const double sign = load.amplitude > 0 ? 1.0 : -1.0;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        trial.amplitude = sign * std::exp(log_a);
        res.full = newmark_full(model, trial, InitialState::rest(model.dofs()), params);
        res.max_ratio = force_balance_report(model, res.full).max_ratio;
        res.amplitude = trial.amplitude;
        res.attempts = attempt;
        if (res.max_ratio >= low && res.max_ratio <= high) return res;
        if (res.max_ratio < low) {
            lo_a = log_a;
            have_lo = true;
        } else {
            hi_a = log_a;
            have_hi = true;
        }
        if (have_lo && have_hi) {
            log_a = 0.5 * (lo_a + hi_a);
        } else {
            log_a += std::log(res.max_ratio) < target ? step : -step;
        }
    }
    std::ostringstream os;
    os << "calibration did not reach a force ratio in [" << low << ", " << high << "] after "
       << max_attempts << " runs (last ratio " << res.max_ratio << ")";
    throw NumericalError(os.str());
}

// ---------------------------------------------------------------------------

const TechniqueResult* ComparisonReport::find(TechniqueKind kind) const {
    for (const auto& r : rows)
        if (r.technique.kind == kind) return &r;
    return nullptr;
}

ordered_json ComparisonReport::to_json() const {
    ordered_json j;
    j["model"] = model;
    j["dofs"] = dofs;
    std::vector<Index> one_based;
    for (Index k : modes) one_based.push_back(k + 1);
    j["modes"] = one_based;
    j["omega"] = std::vector<double>(omega.data(), omega.data() + omega.size());
    j["load"] = {{"amplitude", load_amplitude}, {"omega", load_omega}};
    j["t_max"] = t_max;
    j["steps"] = steps;
    j["max_force_ratio"] = max_force_ratio;
    j["calibration_attempts"] = calibration_attempts;
    if (rayleigh) j["rayleigh"] = {{"alpha", rayleigh->alpha}, {"beta", rayleigh->beta}};
    j["pod_snapshots"] = "full-run displacements at every step, no mean subtraction";
    ordered_json rows_json = ordered_json::array();
    ordered_json timing = ordered_json::object();
    for (const auto& r : rows) {
        ordered_json row;
        row["technique"] = r.technique.id();
        row["label"] = r.technique.label();
        row["ok"] = r.ok;
        if (!r.ok) row["error"] = r.error;
        row["unknowns"] = r.unknowns;
        row["retained"] = r.retained;
        row["gre_percent"] = r.gre ? ordered_json(*r.gre) : ordered_json(nullptr);
        row["newton_iterations"] = {{"total", r.total_iterations}, {"max_per_step", r.max_iterations}};
        if (!r.basis.empty()) {
            std::vector<std::string> labels;
            for (const auto& c : r.basis) labels.push_back(c.label());
            row["basis"] = labels;
        }
        if (!r.ranking.empty()) {
            ordered_json rank = ordered_json::array();
            for (const auto& p : r.ranking) rank.push_back({{"i", p.i + 1}, {"j", p.j + 1}, {"weight", p.weight}});
            row["ranking"] = rank;
        }
        rows_json.push_back(row);
        timing[r.technique.id()] = r.wall_seconds;
    }
    j["techniques"] = rows_json;
    j["timing_seconds"] = timing;
    return j;
}

std::string ComparisonReport::table() const {
    std::ostringstream os;
    os << std::left << std::setw(30) << "Reduction technique" << std::right << std::setw(12)
       << "GRE_M (%)" << std::setw(12) << "# unknowns" << std::setw(10) << "retained" << "\n";
    os << std::string(64, '-') << "\n";
    for (const auto& r : rows) {
        os << std::left << std::setw(30) << r.technique.label() << std::right << std::setw(12);
        if (!r.ok) {
            os << "failed";
        } else if (r.gre) {
            os << std::fixed << std::setprecision(2) << *r.gre;
        } else {
            os << "-";
        }
        os << std::setw(12) << r.unknowns << std::setw(10) << r.retained << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    ExperimentResult out;
    out.setup = build_setup(cfg);
    ExperimentSetup& s = out.setup;
    const StructuralModel& model = *s.model;
    const Index n = model.dofs();
    const Index m = s.basis.size();

    ComparisonReport& rep = out.report;
    rep.model = cfg.model_type;
    rep.dofs = n;
    rep.modes = s.basis.indices;
    rep.omega = s.basis.omega();
    rep.t_max = s.params.t_max;
    rep.steps = s.params.steps();
    rep.rayleigh = s.rayleigh;
    rep.load_omega = s.load.omega;

    auto t0 = std::chrono::steady_clock::now();
    Trajectory full;
    if (cfg.load.calibrate) {
        CalibrationResult cal = calibrate_load(model, s.load, s.params, cfg.load.ratio_low,
                                               cfg.load.ratio_high);
        s.load.amplitude = cal.amplitude;
        rep.calibration_attempts = cal.attempts;
        full = std::move(cal.full);
    } else {
        full = newmark_full(model, s.load, InitialState::rest(n), s.params);
    }
    rep.load_amplitude = s.load.amplitude;
    rep.max_force_ratio = force_balance_report(model, full).max_ratio;
    {
        TechniqueResult row;
        row.technique = {TechniqueKind::full, 0};
        row.ok = true;
        row.unknowns = row.retained = n;
        row.total_iterations = full.total_iterations();
        row.max_iterations = full.max_iterations();
        row.wall_seconds = seconds_since(t0);
        rep.rows.push_back(row);
    }

    std::optional<ModalDerivativeSet> smd, md;
    std::optional<ModalAmplitudeHistory> hist;
    auto get_smd = [&]() -> const ModalDerivativeSet& {
        if (!smd) smd = modal_derivatives(model, s.basis, DerivativeKind::smd);
        return *smd;
    };
    auto get_md = [&]() -> const ModalDerivativeSet& {
        if (!md) md = modal_derivatives(model, s.basis, DerivativeKind::md);
        return *md;
    };
    auto get_hist = [&]() -> const ModalAmplitudeHistory& {
        if (!hist) {
            LinearRunOptions opt;
            opt.zeta = cfg.linear_run_zeta;
            opt.beta = s.params.beta;
            opt.gamma = s.params.gamma;
            hist = linear_modal_run(model, s.basis, s.load, s.params.t_max, s.params.steps(), opt);
        }
        return *hist;
    };

    const auto rest_m = InitialState::rest(m);
    for (const Technique& tech : cfg.techniques) {
        if (tech.kind == TechniqueKind::full) continue;
        TechniqueResult row;
        row.technique = tech;
        const auto start = std::chrono::steady_clock::now();
        try {
            Trajectory tr;
            auto run_lm = [&](const LinearManifold& lm) {
                row.unknowns = lm.candidates;
                row.retained = lm.size();
                row.basis = lm.provenance;
                return newmark_reduced_linear(model, lm, s.load, InitialState::rest(lm.size()),
                                              s.params);
            };
            switch (tech.kind) {
                case TechniqueKind::full: break;
                case TechniqueKind::linearized: {
                    const LinearizedModel lin(s.model);
                    row.unknowns = row.retained = n;
                    tr = newmark_full(lin, s.load, InitialState::rest(n), s.params);
                    break;
                }
                case TechniqueKind::lm_vm:
                    tr = run_lm(build_linear_manifold(s.basis, cfg.deflation_tol));
                    break;
                case TechniqueKind::lm_all_smd:
                    tr = run_lm(build_linear_manifold(s.basis, get_smd(), {}, cfg.deflation_tol));
                    break;
                case TechniqueKind::lm_all_md:
                    tr = run_lm(build_linear_manifold(s.basis, get_md(), {}, cfg.deflation_tol));
                    break;
                case TechniqueKind::lm_mmi:
                case TechniqueKind::lm_mvw: {
                    const bool mmi = tech.kind == TechniqueKind::lm_mmi;
                    const Index k = tech.k > 0 ? tech.k : m;
                    const WeightMatrix W =
                        mmi ? mmi_weights(get_hist()) : mvw_weights(get_hist(), model, s.basis);
                    row.ranking = select_top_k(W, k);
                    std::vector<std::pair<Index, Index>> sel;
                    for (const auto& p : row.ranking) sel.emplace_back(p.i, p.j);
                    tr = run_lm(build_linear_manifold(s.basis, mmi ? get_smd() : get_md(), sel,
                                                      cfg.deflation_tol));
                    break;
                }
                case TechniqueKind::qm_smd:
                case TechniqueKind::qm_md: {
                    const auto qm = build_quadratic_manifold(
                        s.basis, tech.kind == TechniqueKind::qm_smd ? get_smd() : get_md());
                    row.unknowns = row.retained = m;
                    tr = newmark_reduced_qm(model, qm, s.load, rest_m, s.params);
                    break;
                }
                case TechniqueKind::pod: {
                    const Index k = tech.k > 0 ? tech.k : m + m * (m + 1) / 2;
                    const Matrix snaps = full.u.rightCols(full.u.cols() - 1);
                    tr = run_lm(pod_basis(snaps, k));
                    break;
                }
            }
            row.total_iterations = tr.total_iterations();
            row.max_iterations = tr.max_iterations();
            row.gre = gre_metric(full, tr, model.mass(), cfg.samples);
            row.ok = true;
            out.trajectories.emplace(tech.id(), std::move(tr));
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
        row.wall_seconds = seconds_since(start);
        rep.rows.push_back(std::move(row));
    }
    out.trajectories.emplace("full", std::move(full));
    return out;
}

// ---------------------------------------------------------------------------

std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const StructuralModel& model, StateField field) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path + "'");
    const Matrix& data = field == StateField::displacement ? traj.u
                         : field == StateField::velocity   ? traj.v
                                                           : traj.a;
    out << "t";
    for (Index d = 0; d < data.rows(); ++d) out << ",dof_" << model.dof_label(d);
    out << '\n';
    for (Index k = 0; k < data.cols(); ++k) {
        out << format_g17(traj.times(k));
        for (Index d = 0; d < data.rows(); ++d) out << ',' << format_g17(data(d, k));
        out << '\n';
    }
}

Trajectory read_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw InputError("'" + path + "' is empty");
    const Index cols = static_cast<Index>(std::count(line.begin(), line.end(), ','));
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            // strtod, unlike stod, accepts subnormals
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0') {
                throw InputError("'" + path + "' has a non-numeric field '" + cell + "'");
            }
            vals.push_back(v);
        }
        if (static_cast<Index>(vals.size()) != cols + 1) {
            throw InputError("'" + path + "' has a row with the wrong number of fields");
        }
        rows.push_back(std::move(vals));
    }
    Trajectory tr;
    const Index steps = static_cast<Index>(rows.size());
    tr.times.resize(steps);
    tr.u.resize(cols, steps);
    for (Index k = 0; k < steps; ++k) {
        tr.times(k) = rows[k][0];
        for (Index d = 0; d < cols; ++d) tr.u(d, k) = rows[k][d + 1];
    }
    tr.q = tr.u;
    return tr;
}

void write_outputs(const ExperimentResult& result, const std::string& dir, bool velocities) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path root(dir);
    const StructuralModel& model = *result.setup.model;
    {
        std::ofstream out(root / "report.json", std::ios::binary);
        out << result.report.to_json().dump(2) << '\n';
    }
    {
        std::ofstream out(root / "report.txt", std::ios::binary);
        out << result.report.table();
    }
    const auto& p = result.setup.params;
    for (const auto& [id, traj] : result.trajectories) {
        std::string stem = id;
        std::replace(stem.begin(), stem.end(), ':', '_');
        write_trajectory_csv((root / (stem + ".csv")).string(), traj, model);
        if (velocities) {
            write_trajectory_csv((root / (stem + "_v.csv")).string(), traj, model, StateField::velocity);
            write_trajectory_csv((root / (stem + "_a.csv")).string(), traj, model,
                                 StateField::acceleration);
        }
        ordered_json manifest;
        manifest["technique"] = id;
        manifest["params"] = {{"h", p.h},           {"t_max", p.t_max},     {"steps", p.steps()},
                              {"beta", p.beta},     {"gamma", p.gamma},     {"epsilon", p.epsilon},
                              {"max_iterations", p.max_iterations}};
        manifest["convergence"] = {{"total_iterations", traj.total_iterations()},
                                   {"max_iterations_per_step", traj.max_iterations()},
                                   {"max_residual", traj.residuals.empty() ? 0.0
                                                        : *std::max_element(traj.residuals.begin(),
                                                                            traj.residuals.end())}};
        for (const auto& r : result.report.rows) {
            if (r.technique.id() == id) manifest["wall_seconds"] = r.wall_seconds;
        }
        std::ofstream out(root / (stem + ".json"), std::ios::binary);
        out << manifest.dump(2) << '\n';
    }
}

}  // namespace qmrom
