#include "qmrom/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace qmrom {

namespace {

using nlohmann::json;

const std::map<std::string, TechniqueKind>& technique_names() {
    static const std::map<std::string, TechniqueKind> names = {
        {"full", TechniqueKind::full},
        {"linearized", TechniqueKind::linearized},
        {"lm_vm", TechniqueKind::lm_vm},
        {"lm_all_smd", TechniqueKind::lm_all_smd},
        {"lm_all_md", TechniqueKind::lm_all_md},
        {"lm_mmi", TechniqueKind::lm_mmi},
        {"lm_mvw", TechniqueKind::lm_mvw},
        {"qm_smd", TechniqueKind::qm_smd},
        {"qm_md", TechniqueKind::qm_md},
        {"pod", TechniqueKind::pod},
    };
    return names;
}

[[noreturn]] void fail(const std::string& key, const std::string& what) {
    throw InputError("config: '" + key + "' " + what);
}

double get_positive(const json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) fail(key, "must be a number");
    const double v = j.at(key).get<double>();
    if (!(v > 0.0)) fail(key, "must be positive");
    return v;
}

double get_number(const json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) fail(key, "must be a number");
    return j.at(key).get<double>();
}

int dof_index(const std::string& name) {
    if (name == "u") return 0;
    if (name == "w") return 1;
    if (name == "theta" || name == "t") return 2;
    fail("bc", "has unknown DOF name '" + name + "'");
}

void parse_beam(const json& j, ExperimentConfig& cfg) {
    const json params = j.value("params", json::object());
    auto& b = cfg.beam;
    if (params.contains("n_elements")) {
        if (!params.at("n_elements").is_number_integer()) fail("params.n_elements", "must be an integer");
        b.n_elements = params.at("n_elements").get<int>();
        if (b.n_elements < 2) fail("params.n_elements", "must be at least 2");
    }
    b.length = get_positive(params, "length", b.length);
    b.width = get_positive(params, "width", b.width);
    b.thickness = get_positive(params, "thickness", b.thickness);
    b.young_modulus = get_positive(params, "young_modulus", b.young_modulus);
    b.poisson_ratio = get_positive(params, "poisson_ratio", b.poisson_ratio);
    b.density = get_positive(params, "density", b.density);

    const int n_nodes = b.n_elements + 1;
    const json bc = j.value("bc", json("simply_supported"));
    if (bc.is_string()) {
        const auto name = bc.get<std::string>();
        if (name == "simply_supported") b.fixed = simply_supported(n_nodes);
        else if (name == "clamped") b.fixed = clamped_clamped(n_nodes);
        else if (name == "cantilever") b.fixed = cantilever(n_nodes);
        else fail("bc", "must be simply_supported, clamped, cantilever or a list");
    } else if (bc.is_array()) {
        b.fixed.assign(n_nodes, {false, false, false});
        for (const auto& entry : bc) {
            int node = entry.value("node", -1);
            if (node < 0) node += n_nodes;
            if (node < 0 || node >= n_nodes) fail("bc", "has a node index out of range");
            for (const auto& d : entry.value("dofs", json::array())) {
                b.fixed[node][dof_index(d.get<std::string>())] = true;
            }
        }
    } else {
        fail("bc", "has an unsupported type");
    }

    cfg.damping.rayleigh = true;
    if (j.contains("damping")) {
        const json& d = j.at("damping");
        if (d.is_string() && d.get<std::string>() == "none") {
            cfg.damping.rayleigh = false;
        } else if (d.is_object()) {
            cfg.damping.zeta = get_number(d, "zeta", cfg.damping.zeta);
            if (cfg.damping.zeta < 0.0) fail("damping.zeta", "must be nonnegative");
            if (d.contains("modes")) {
                const auto modes = d.at("modes").get<std::vector<int>>();
                if (modes.size() != 2 || modes[0] < 1 || modes[1] < 1 || modes[0] == modes[1]) {
                    fail("damping.modes", "must be two distinct 1-based mode numbers");
                }
                cfg.damping.mode_a = modes[0];
                cfg.damping.mode_b = modes[1];
            }
        } else {
            fail("damping", "must be \"none\" or an object");
        }
    }
}

void parse_two_dof(const json& j, ExperimentConfig& cfg) {
    const json params = j.value("params", json::object());
    auto& p = cfg.two_dof;
    p.m1 = get_positive(params, "m1", p.m1);
    p.m2 = get_positive(params, "m2", p.m2);
    p.k1 = get_positive(params, "k1", p.k1);
    p.k2 = get_positive(params, "k2", p.k2);
    p.c1 = get_number(params, "c1", p.c1);
    p.c2 = get_number(params, "c2", p.c2);
    p.a = get_number(params, "a", p.a);
    p.b = get_number(params, "b", p.b);
    p.c = get_number(params, "c", p.c);
    if (j.contains("damping")) fail("damping", "is not used by two_dof; set c1 and c2");
    if (!j.contains("load") || !j.at("load").contains("spatial")) {
        cfg.load.spatial = LoadConfig::Spatial::vector;
        cfg.load.vector = {1.0, 0.0};
    }
}

void parse_load(const json& j, ExperimentConfig& cfg) {
    if (!j.contains("load")) fail("load", "is required");
    const json& l = j.at("load");
    auto& load = cfg.load;
    const std::string kind = l.value("kind", "quasi_periodic");
    if (kind == "quasi_periodic") {
        load.kind = LoadKind::quasi_periodic;
        load.amplitude = get_number(l, "p0", 0.0);
    } else if (kind == "pulse") {
        load.kind = LoadKind::pulse;
        load.amplitude = get_number(l, "A", get_number(l, "p0", 0.0));
    } else if (kind == "custom_samples") {
        load.kind = LoadKind::custom_samples;
        load.amplitude = get_number(l, "amplitude", 1.0);
        load.samples = l.value("samples", std::vector<double>{});
        load.sample_dt = get_positive(l, "sample_dt", 0.0);
        if (load.samples.empty()) fail("load.samples", "must be a nonempty list");
    } else {
        fail("load.kind", "must be quasi_periodic, pulse or custom_samples");
    }

    const json om = l.value("omega_mode", json("first_eig"));
    if (om.is_number()) {
        load.omega_rule = OmegaRule::value;
        load.omega = om.get<double>();
        if (!(load.omega > 0.0)) fail("load.omega_mode", "must be positive");
    } else if (om == "first_eig") {
        load.omega_rule = OmegaRule::first_eig;
    } else if (om == "mean_first_two") {
        load.omega_rule = OmegaRule::mean_first_two;
    } else {
        fail("load.omega_mode", "must be first_eig, mean_first_two or a number");
    }

    if (l.contains("spatial")) {
        const json& s = l.at("spatial");
        if (s.is_string()) {
            if (s.get<std::string>() != "uniform_transverse") {
                fail("load.spatial", "must be uniform_transverse, {nodes: [...]} or {vector: [...]}");
            }
            load.spatial = LoadConfig::Spatial::uniform_transverse;
        } else if (s.is_object() && s.contains("nodes")) {
            load.spatial = LoadConfig::Spatial::nodes;
            load.nodes = s.at("nodes").get<std::vector<int>>();
        } else if (s.is_object() && s.contains("vector")) {
            load.spatial = LoadConfig::Spatial::vector;
            load.vector = s.at("vector").get<std::vector<double>>();
        } else if (s.is_array()) {
            load.spatial = LoadConfig::Spatial::nodes;
            load.nodes = s.get<std::vector<int>>();
        } else {
            fail("load.spatial", "has an unsupported form");
        }
    }
    load.calibrate = l.value("calibrate", false);
    if (l.contains("ratio_range")) {
        const auto r = l.at("ratio_range").get<std::vector<double>>();
        if (r.size() != 2 || !(r[0] > 0.0) || !(r[1] > r[0])) {
            fail("load.ratio_range", "must be [low, high] with 0 < low < high");
        }
        load.ratio_low = r[0];
        load.ratio_high = r[1];
    }
}

}  // namespace

std::string Technique::id() const {
    for (const auto& [name, kind_] : technique_names()) {
        if (kind_ == kind) {
            return k > 0 && (kind == TechniqueKind::lm_mmi || kind == TechniqueKind::lm_mvw ||
                             kind == TechniqueKind::pod)
                       ? name + ":" + std::to_string(k)
                       : name;
        }
    }
    return "?";
}

std::string Technique::label() const {
    switch (kind) {
        case TechniqueKind::full: return "Full nonlinear";
        case TechniqueKind::linearized: return "Linearized";
        case TechniqueKind::lm_vm: return "LM (VMs only)";
        case TechniqueKind::lm_all_smd: return "LM (All SMDs)";
        case TechniqueKind::lm_all_md: return "LM (All MDs)";
        case TechniqueKind::lm_mmi: return "LM-Selected SMDs (MMI)";
        case TechniqueKind::lm_mvw: return "LM-Selected MDs (MVW)";
        case TechniqueKind::qm_smd: return "Quadratic Manifold - SMDs";
        case TechniqueKind::qm_md: return "Quadratic Manifold - MDs";
        case TechniqueKind::pod: return "POD";
    }
    return "?";
}

Technique Technique::parse(const std::string& text) {
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    const auto it = technique_names().find(name);
    if (it == technique_names().end()) throw InputError("unknown technique '" + name + "'");
    Technique t{it->second, 0};
    if (colon != std::string::npos) {
        try {
            t.k = std::stol(text.substr(colon + 1));
        } catch (const std::exception&) {
            throw InputError("technique '" + text + "' has a malformed count");
        }
        if (t.k < 1) throw InputError("technique '" + text + "' needs a positive count");
    }
    return t;
}

Technique Technique::from_json(const nlohmann::json& j) {
    if (j.is_string()) return parse(j.get<std::string>());
    if (!j.is_object() || !j.contains("name")) throw InputError("config: technique entries need a name");
    Technique t = parse(j.at("name").get<std::string>());
    if (j.contains("k")) {
        t.k = j.at("k").get<Index>();
        if (t.k < 1) throw InputError("config: technique k must be positive");
    }
    return t;
}

ExperimentConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) throw InputError("config: top level must be an object");
    ExperimentConfig cfg;
    try {
        cfg.model_type = j.value("model", "vk_beam");
        if (cfg.model_type == "vk_beam") {
            parse_beam(j, cfg);
        } else if (cfg.model_type == "two_dof") {
            parse_two_dof(j, cfg);
        } else {
            fail("model", "must be vk_beam or two_dof");
        }
        parse_load(j, cfg);

        const json integ = j.value("integrator", json::object());
        if (integ.contains("steps")) {
            cfg.steps = integ.at("steps").get<int>();
            if (cfg.steps < 1) fail("integrator.steps", "must be positive");
        }
        if (integ.contains("t_max")) cfg.t_max = get_positive(integ, "t_max", 1.0);
        cfg.periods = get_positive(integ, "periods", cfg.periods);
        cfg.beta = get_positive(integ, "beta", cfg.beta);
        cfg.gamma = get_positive(integ, "gamma", cfg.gamma);
        cfg.epsilon = get_positive(integ, "epsilon", cfg.epsilon);
        cfg.max_iterations = integ.value("max_iterations", cfg.max_iterations);

        const json red = j.value("reduction", json::object());
        if (red.contains("modes")) {
            for (int k : red.at("modes").get<std::vector<int>>()) {
                if (k < 1) fail("reduction.modes", "are 1-based and must be positive");
                cfg.modes.push_back(k - 1);
            }
            cfg.m = static_cast<Index>(cfg.modes.size());
        }
        if (red.contains("m")) {
            cfg.m = red.at("m").get<Index>();
            if (cfg.m < 1) fail("reduction.m", "must be positive");
            if (!cfg.modes.empty() && static_cast<Index>(cfg.modes.size()) != cfg.m) {
                fail("reduction.m", "disagrees with the length of reduction.modes");
            }
        }
        cfg.load_participating = red.value("select", std::string("lowest")) == "load_participating";
        cfg.deflation_tol = get_positive(red, "deflation_tol", cfg.deflation_tol);
        if (red.contains("linear_run_zeta")) {
            const json& z = red.at("linear_run_zeta");
            if (z.is_null() || z == "model") cfg.linear_run_zeta.reset();
            else cfg.linear_run_zeta = z.get<double>();
        }

        if (j.contains("techniques")) {
            for (const auto& t : j.at("techniques")) cfg.techniques.push_back(Technique::from_json(t));
        }
        cfg.output_dir = j.value("output", std::string());
        if (j.contains("samples")) {
            const json& s = j.at("samples");
            if (!(s.is_string() && s.get<std::string>() == "all")) {
                cfg.samples = s.get<std::vector<Index>>();
            }
        }
        cfg.write_velocities = j.value("write_velocities", false);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("config: ") + e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

}  // namespace qmrom
