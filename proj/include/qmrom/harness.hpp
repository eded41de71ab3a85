#ifndef QMROM_HARNESS_HPP
#define QMROM_HARNESS_HPP

#include "qmrom/config.hpp"
#include "qmrom/integrate.hpp"
#include "qmrom/manifold.hpp"
#include "qmrom/modal.hpp"
#include "qmrom/model.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qmrom {

/// Everything a run needs, resolved from a config.
struct ExperimentSetup {
    ModelPtr model;                              // damped model used by every technique
    std::shared_ptr<const VonKarmanBeam> beam;   // null for two_dof
    LoadCase load;
    ModalBasis basis;                            // reduction modes
    IntegratorParams params;
    std::optional<RayleighCoefficients> rayleigh;
    Vector frequencies;                          // lowest few omega (rad/s)
};

ExperimentSetup build_setup(const ExperimentConfig& cfg);

/// Mass-weighted global relative error in percent over the sample set
/// (every step after t = 0 when empty).
double gre_metric(const Trajectory& full, const Trajectory& reduced, const Matrix& M,
                  const std::vector<Index>& samples = {});

struct ForceBalance {
    Vector linear;     // ||K(0) u||
    Vector nonlinear;  // ||f(u) - K(0) u||
    Vector ratio;      // nonlinear / linear, 0 where linear vanishes
    double max_ratio = 0.0;
};

ForceBalance force_balance_report(const StructuralModel& model, const Trajectory& traj);

struct CalibrationResult {
    double amplitude = 0.0;
    double max_ratio = 0.0;
    int attempts = 0;
    Trajectory full;
};

/// Rescale the load amplitude until the maximum force ratio of the full run
/// lies in [low, high]. Steps geometrically by sqrt(10) from the configured
/// amplitude, then bisects in log-amplitude once the range is bracketed.
CalibrationResult calibrate_load(const StructuralModel& model, const LoadCase& load,
                                 const IntegratorParams& params, double low = 0.5,
                                 double high = 2.0, int max_attempts = 30);

struct TechniqueResult {
    Technique technique;
    bool ok = false;
    std::string error;
    Index unknowns = 0;   // before deflation
    Index retained = 0;   // after deflation
    std::optional<double> gre;
    int total_iterations = 0;
    int max_iterations = 0;
    double wall_seconds = 0.0;
    std::vector<BasisColumn> basis;
    std::vector<RankedPair> ranking;
};

struct ComparisonReport {
    std::string model;
    Index dofs = 0;
    std::vector<Index> modes;  // 0-based
    Vector omega;              // of the reduction modes
    double load_amplitude = 0.0;
    double load_omega = 0.0;
    double t_max = 0.0;
    int steps = 0;
    double max_force_ratio = 0.0;
    int calibration_attempts = 0;
    std::optional<RayleighCoefficients> rayleigh;
    std::vector<TechniqueResult> rows;

    const TechniqueResult* find(TechniqueKind kind) const;
    nlohmann::ordered_json to_json() const;
    /// Aligned text table: technique, GRE_M (%), # unknowns.
    std::string table() const;
};

struct ExperimentResult {
    ExperimentSetup setup;
    ComparisonReport report;
    std::map<std::string, Trajectory> trajectories;
};

/// Run the full reference once, then every requested technique against it.
/// A failing technique is recorded and the others still run; a failing
/// reference run throws.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// report.json, report.txt, one CSV per technique and a JSON manifest per run.
void write_outputs(const ExperimentResult& result, const std::string& dir, bool velocities);

enum class StateField { displacement, velocity, acceleration };

/// Header "t,dof_<label>...", values printed with %.17g, LF line endings.
void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const StructuralModel& model,
                          StateField field = StateField::displacement);

/// Displacement CSV written by write_trajectory_csv.
Trajectory read_trajectory_csv(const std::string& path);

std::string format_g17(double x);

}  // namespace qmrom

#endif  // QMROM_HARNESS_HPP
