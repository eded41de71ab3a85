#ifndef QMROM_CONFIG_HPP
#define QMROM_CONFIG_HPP

#include "qmrom/integrate.hpp"
#include "qmrom/model.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace qmrom {

enum class TechniqueKind {
    full,
    linearized,
    lm_vm,
    lm_all_smd,
    lm_all_md,
    lm_mmi,
    lm_mvw,
    qm_smd,
    qm_md,
    pod,
};

struct Technique {
    TechniqueKind kind = TechniqueKind::full;
    /// Selection size (lm_mmi, lm_mvw) or POD size; 0 picks the default.
    Index k = 0;

    std::string id() const;
    std::string label() const;

    /// "qm_smd", "lm_mmi:3", "pod:5", ...
    static Technique parse(const std::string& text);
    static Technique from_json(const nlohmann::json& j);
};

enum class OmegaRule { first_eig, mean_first_two, value };

struct LoadConfig {
    LoadKind kind = LoadKind::quasi_periodic;
    double amplitude = 0.0;
    OmegaRule omega_rule = OmegaRule::first_eig;
    double omega = 0.0;  // used with OmegaRule::value
    enum class Spatial { uniform_transverse, nodes, vector } spatial = Spatial::uniform_transverse;
    std::vector<int> nodes;
    std::vector<double> vector;
    std::vector<double> samples;
    double sample_dt = 0.0;
    bool calibrate = false;
    double ratio_low = 0.5;
    double ratio_high = 2.0;
};

struct DampingConfig {
    bool rayleigh = false;
    double zeta = 0.004;
    int mode_a = 1;  // 1-based
    int mode_b = 2;
};

struct ExperimentConfig {
    std::string model_type = "vk_beam";  // or "two_dof"
    BeamModelSpec beam;
    TwoDofParams two_dof;
    DampingConfig damping;
    LoadConfig load;

    int steps = 400;
    std::optional<double> t_max;
    double periods = 4.0;  // of the load frequency, when t_max is absent
    double beta = 0.25, gamma = 0.5, epsilon = 1e-6;
    int max_iterations = 25;

    /// 0-based spectral indices of the reduction modes; empty -> first `m`.
    std::vector<Index> modes;
    Index m = 2;
    bool load_participating = false;
    double deflation_tol = 1e-8;
    std::optional<double> linear_run_zeta = 0.004;

    std::vector<Technique> techniques;
    std::string output_dir;
    std::vector<Index> samples;  // empty -> every step
    bool write_velocities = false;
};

/// Parse a JSON config. Throws InputError with the offending key.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

}  // namespace qmrom

#endif  // QMROM_CONFIG_HPP
