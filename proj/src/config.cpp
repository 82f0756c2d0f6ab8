#include "ddp/config.hpp"

#include <json.hpp>

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ddp {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void range_error(const std::string& path, const std::string& what) {
    throw std::invalid_argument("config: value out of range at \"" + path + "\": " + what);
}

class Section {
public:
    Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object())
            throw std::invalid_argument("config: expected an object at \"" + path_ + "\"");
    }

    ~Section() = default;

    bool has(const std::string& key) {
        seen_.insert(key);
        return node_.contains(key);
    }

    const json& at(const std::string& key) { return node_.at(key); }

    Section child(const std::string& key) {
        seen_.insert(key);
        return Section(node_.at(key), join(key));
    }

    double number(const std::string& key, double fallback) {
        seen_.insert(key);
        if (!node_.contains(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_number())
            throw std::invalid_argument("config: expected a number at \"" + join(key) + "\"");
        return v.get<double>();
    }

    int integer(const std::string& key, int fallback) {
        seen_.insert(key);
        if (!node_.contains(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_number_integer())
            throw std::invalid_argument("config: expected an integer at \"" + join(key) + "\"");
        return v.get<int>();
    }

    std::string text(const std::string& key, const std::string& fallback) {
        seen_.insert(key);
        if (!node_.contains(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_string())
            throw std::invalid_argument("config: expected a string at \"" + join(key) + "\"");
        return v.get<std::string>();
    }

    std::array<double, 3> point(const std::string& key, std::array<double, 3> fallback) {
        seen_.insert(key);
        if (!node_.contains(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_array() || v.size() > 3)
            throw std::invalid_argument("config: expected an array of up to 3 numbers at \"" +
                                        join(key) + "\"");
        std::array<double, 3> out{0.0, 0.0, 0.0};
        for (std::size_t d = 0; d < v.size(); ++d) {
            if (!v[d].is_number())
                throw std::invalid_argument("config: expected a number at \"" + join(key) + "\"");
            out[d] = v[d].get<double>();
        }
        return out;
    }

    std::string join(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    /// Call after reading every known key: rejects anything unrecognized.
    void finish() const {
        for (auto it = node_.begin(); it != node_.end(); ++it)
            if (!seen_.contains(it.key()))
                throw std::invalid_argument("config: unknown key \"" + join(it.key()) + "\"");
    }

private:
    const json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

SimConfig::PotentialCfg parse_potential(Section sec) {
    SimConfig::PotentialCfg p;
    p.form = sec.text("form", p.form);
    if (p.form != "quadratic" && p.form != "shifted_quadratic")
        range_error(sec.join("form"), "must be quadratic or shifted_quadratic");
    p.center = sec.point("center", p.center);
    p.curvature = sec.number("curvature", p.curvature);
    if (!(p.curvature > 0.0)) range_error(sec.join("curvature"), "must be > 0");
    p.amplitude = sec.number("amplitude", p.amplitude);
    p.frequency = sec.point("frequency", p.frequency);
    sec.finish();
    return p;
}

json dump_potential(const SimConfig::PotentialCfg& p) {
    json j;
    j["form"] = p.form;
    j["center"] = p.center;
    j["curvature"] = p.curvature;
    j["amplitude"] = p.amplitude;
    j["frequency"] = p.frequency;
    return j;
}

} // namespace

SimConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // Convert the byte offset to line/column for the message.
        std::size_t line = 1, col = 1;
        for (std::size_t b = 0; b + 1 < e.byte && b < text.size(); ++b) {
            if (text[b] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::ostringstream msg;
        msg << "config: syntax error at line " << line << ", column " << col << ": " << e.what();
        throw std::invalid_argument(msg.str());
    }

    SimConfig cfg;
    Section root(doc, "");

    if (root.has("grid")) {
        Section g = root.child("grid");
        cfg.grid.dim = g.integer("dim", cfg.grid.dim);
        if (cfg.grid.dim != 2 && cfg.grid.dim != 3)
            range_error(g.join("dim"), "must be 2 or 3");
        cfg.grid.half_width = g.number("half_width", cfg.grid.half_width);
        if (!(cfg.grid.half_width > 0.0)) range_error(g.join("half_width"), "must be > 0");
        cfg.grid.cells = g.integer("cells", cfg.grid.cells);
        if (cfg.grid.cells < 4 || cfg.grid.cells % 2 != 0)
            range_error(g.join("cells"), "must be even and >= 4");
        g.finish();
    }

    if (root.has("potentials")) {
        Section pots = root.child("potentials");
        if (pots.has("v_n")) cfg.v_n = parse_potential(pots.child("v_n"));
        if (pots.has("v_p")) cfg.v_p = parse_potential(pots.child("v_p"));
        pots.finish();
    }

    if (root.has("doping")) {
        Section d = root.child("doping");
        cfg.doping.kind = d.text("kind", cfg.doping.kind);
        if (cfg.doping.kind != "none" && cfg.doping.kind != "gaussian" &&
            cfg.doping.kind != "two_bump")
            range_error(d.join("kind"), "must be none, gaussian or two_bump");
        cfg.doping.amplitude = d.number("amplitude", cfg.doping.amplitude);
        cfg.doping.center = d.point("center", cfg.doping.center);
        cfg.doping.width = d.number("width", cfg.doping.width);
        if (!(cfg.doping.width > 0.0)) range_error(d.join("width"), "must be > 0");
        cfg.doping.amplitude2 = d.number("amplitude2", cfg.doping.amplitude2);
        cfg.doping.center2 = d.point("center2", cfg.doping.center2);
        cfg.doping.width2 = d.number("width2", cfg.doping.width2);
        if (!(cfg.doping.width2 > 0.0)) range_error(d.join("width2"), "must be > 0");
        d.finish();
    }

    if (root.has("recombination")) {
        Section r = root.child("recombination");
        cfg.recombination.variant = r.text("variant", cfg.recombination.variant);
        const std::string& v = cfg.recombination.variant;
        if (v != "band_to_band" && v != "srh" && v != "auger")
            range_error(r.join("variant"), "must be band_to_band, srh or auger");
        cfg.recombination.c = r.number("c", cfg.recombination.c);
        if (!(cfg.recombination.c > 0.0)) range_error(r.join("c"), "must be > 0");
        cfg.recombination.r1 = r.number("r1", cfg.recombination.r1);
        cfg.recombination.r2 = r.number("r2", cfg.recombination.r2);
        cfg.recombination.r3 = r.number("r3", cfg.recombination.r3);
        if (!(cfg.recombination.r1 > 0.0)) range_error(r.join("r1"), "must be > 0");
        if (!(cfg.recombination.r2 > 0.0)) range_error(r.join("r2"), "must be > 0");
        if (!(cfg.recombination.r3 > 0.0)) range_error(r.join("r3"), "must be > 0");
        cfg.recombination.cn = r.number("cn", cfg.recombination.cn);
        cfg.recombination.cp = r.number("cp", cfg.recombination.cp);
        if (!(cfg.recombination.cn > 0.0)) range_error(r.join("cn"), "must be > 0");
        if (!(cfg.recombination.cp > 0.0)) range_error(r.join("cp"), "must be > 0");
        cfg.recombination.delta = r.number("delta", cfg.recombination.delta);
        if (!(cfg.recombination.delta > 0.0)) range_error(r.join("delta"), "must be > 0");
        cfg.recombination.sigma = r.number("sigma", cfg.recombination.sigma);
        if (cfg.recombination.sigma < 0.0) range_error(r.join("sigma"), "must be >= 0");
        r.finish();
    }

    cfg.epsilon = root.number("epsilon", cfg.epsilon);
    if (!(cfg.epsilon > 0.0)) range_error("epsilon", "must be > 0");

    if (root.has("initial")) {
        Section ini = root.child("initial");
        cfg.initial.kind = ini.text("kind", cfg.initial.kind);
        const std::string& k = cfg.initial.kind;
        if (k != "equilibrium" && k != "gaussian_perturbation" && k != "custom_checkpoint")
            range_error(ini.join("kind"),
                        "must be equilibrium, gaussian_perturbation or custom_checkpoint");
        cfg.initial.amplitude = ini.number("amplitude", cfg.initial.amplitude);
        if (cfg.initial.amplitude < -1.0)
            range_error(ini.join("amplitude"), "must be >= -1 (densities are clipped at 0)");
        cfg.initial.center = ini.point("center", cfg.initial.center);
        cfg.initial.width = ini.number("width", cfg.initial.width);
        if (!(cfg.initial.width > 0.0)) range_error(ini.join("width"), "must be > 0");
        cfg.initial.checkpoint_path = ini.text("checkpoint_path", cfg.initial.checkpoint_path);
        if (k == "custom_checkpoint" && cfg.initial.checkpoint_path.empty())
            range_error(ini.join("checkpoint_path"),
                        "required for initial.kind = custom_checkpoint");
        ini.finish();
    }

    if (root.has("stepping")) {
        Section st = root.child("stepping");
        cfg.stepping.flux = st.text("flux", cfg.stepping.flux);
        if (cfg.stepping.flux != "scharfetter_gummel" && cfg.stepping.flux != "central_upwind")
            range_error(st.join("flux"), "must be scharfetter_gummel or central_upwind");
        cfg.stepping.dt_policy = st.text("dt_policy", cfg.stepping.dt_policy);
        if (cfg.stepping.dt_policy != "auto" && cfg.stepping.dt_policy != "fixed")
            range_error(st.join("dt_policy"), "must be auto or fixed");
        cfg.stepping.dt = st.number("dt", cfg.stepping.dt);
        if (cfg.stepping.dt_policy == "fixed" && !(cfg.stepping.dt > 0.0))
            range_error(st.join("dt"), "must be > 0 for dt_policy = fixed");
        cfg.stepping.safety = st.number("safety", cfg.stepping.safety);
        if (!(cfg.stepping.safety > 0.0 && cfg.stepping.safety <= 1.0))
            range_error(st.join("safety"), "must lie in (0,1]");
        cfg.stepping.t_end = st.number("t_end", cfg.stepping.t_end);
        if (cfg.stepping.t_end < 0.0) range_error(st.join("t_end"), "must be >= 0");
        cfg.stepping.sample_interval = st.number("sample_interval", cfg.stepping.sample_interval);
        if (!(cfg.stepping.sample_interval > 0.0))
            range_error(st.join("sample_interval"), "must be > 0");
        cfg.stepping.stop_tol = st.number("stop_tol", cfg.stepping.stop_tol);
        if (cfg.stepping.stop_tol < 0.0) range_error(st.join("stop_tol"), "must be >= 0");
        st.finish();
    }

    if (root.has("steady")) {
        Section sd = root.child("steady");
        cfg.steady.theta = sd.number("theta", cfg.steady.theta);
        if (!(cfg.steady.theta > 0.0 && cfg.steady.theta <= 1.0))
            range_error(sd.join("theta"), "must lie in (0,1]");
        cfg.steady.tol = sd.number("tol", cfg.steady.tol);
        if (!(cfg.steady.tol > 0.0)) range_error(sd.join("tol"), "must be > 0");
        cfg.steady.max_iter = sd.integer("max_iter", cfg.steady.max_iter);
        if (cfg.steady.max_iter < 1) range_error(sd.join("max_iter"), "must be >= 1");
        cfg.steady.alpha = sd.number("alpha", cfg.steady.alpha);
        sd.finish();
    }

    if (root.has("outputs")) {
        Section out = root.child("outputs");
        cfg.outputs.csv_path = out.text("csv_path", cfg.outputs.csv_path);
        cfg.outputs.checkpoint_path = out.text("checkpoint_path", cfg.outputs.checkpoint_path);
        cfg.outputs.checkpoint_every = out.integer("checkpoint_every", cfg.outputs.checkpoint_every);
        if (cfg.outputs.checkpoint_every < 0)
            range_error(out.join("checkpoint_every"), "must be >= 0");
        out.finish();
    }

    root.finish();
    return cfg;
}

std::string serialize_config(const SimConfig& cfg) {
    json j;
    j["grid"] = {{"dim", cfg.grid.dim},
                 {"half_width", cfg.grid.half_width},
                 {"cells", cfg.grid.cells}};
    j["potentials"] = {{"v_n", dump_potential(cfg.v_n)}, {"v_p", dump_potential(cfg.v_p)}};
    j["doping"] = {{"kind", cfg.doping.kind},       {"amplitude", cfg.doping.amplitude},
                   {"center", cfg.doping.center},   {"width", cfg.doping.width},
                   {"amplitude2", cfg.doping.amplitude2}, {"center2", cfg.doping.center2},
                   {"width2", cfg.doping.width2}};
    j["recombination"] = {{"variant", cfg.recombination.variant},
                          {"c", cfg.recombination.c},
                          {"r1", cfg.recombination.r1},
                          {"r2", cfg.recombination.r2},
                          {"r3", cfg.recombination.r3},
                          {"cn", cfg.recombination.cn},
                          {"cp", cfg.recombination.cp},
                          {"delta", cfg.recombination.delta},
                          {"sigma", cfg.recombination.sigma}};
    j["epsilon"] = cfg.epsilon;
    j["initial"] = {{"kind", cfg.initial.kind},
                    {"amplitude", cfg.initial.amplitude},
                    {"center", cfg.initial.center},
                    {"width", cfg.initial.width},
                    {"checkpoint_path", cfg.initial.checkpoint_path}};
    j["stepping"] = {{"flux", cfg.stepping.flux},
                     {"dt_policy", cfg.stepping.dt_policy},
                     {"dt", cfg.stepping.dt},
                     {"safety", cfg.stepping.safety},
                     {"t_end", cfg.stepping.t_end},
                     {"sample_interval", cfg.stepping.sample_interval},
                     {"stop_tol", cfg.stepping.stop_tol}};
    j["steady"] = {{"theta", cfg.steady.theta},
                   {"tol", cfg.steady.tol},
                   {"max_iter", cfg.steady.max_iter},
                   {"alpha", cfg.steady.alpha}};
    j["outputs"] = {{"csv_path", cfg.outputs.csv_path},
                    {"checkpoint_path", cfg.outputs.checkpoint_path},
                    {"checkpoint_every", cfg.outputs.checkpoint_every}};
    return j.dump(2) + "\n";
}

Grid build_grid(const SimConfig& cfg) {
    return Grid(cfg.grid.dim, cfg.grid.half_width, cfg.grid.cells);
}

namespace {

PotentialSpec build_potential(const SimConfig::PotentialCfg& p) {
    PotentialSpec spec;
    spec.form = p.form == "shifted_quadratic" ? PotentialSpec::Form::ShiftedQuadratic
                                              : PotentialSpec::Form::Quadratic;
    spec.center = p.center;
    spec.curvature = p.curvature;
    spec.amplitude = p.amplitude;
    spec.frequency = p.frequency;
    return spec;
}

double gaussian_bump(const std::array<double, 3>& x, const std::array<double, 3>& c,
                     double width, int dim) {
    double q = 0.0;
    for (int d = 0; d < dim; ++d) {
        double dx = x[d] - c[d];
        q += dx * dx;
    }
    return std::exp(-q / (2.0 * width * width));
}

ScalarField build_doping(const SimConfig& cfg, const Grid& g) {
    ScalarField d(g, 0.0);
    if (cfg.doping.kind == "none") return d;
    const int n = g.cells_per_axis();
    const int nk = g.dim() == 3 ? n : 1;
    for (int k = 0; k < nk; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                auto x = g.center(i, j, k);
                double v = cfg.doping.amplitude *
                           gaussian_bump(x, cfg.doping.center, cfg.doping.width, g.dim());
                if (cfg.doping.kind == "two_bump")
                    v += cfg.doping.amplitude2 *
                         gaussian_bump(x, cfg.doping.center2, cfg.doping.width2, g.dim());
                d.at(i, j, k) = v;
            }
    return d;
}

RecombinationModel build_recombination(const SimConfig::RecombinationCfg& r) {
    if (r.variant == "srh") return RecombinationModel::srh(r.r1, r.r2, r.r3, r.sigma, r.delta);
    if (r.variant == "auger") return RecombinationModel::auger(r.cn, r.cp, r.sigma, r.delta);
    return RecombinationModel::band_to_band(r.c, r.sigma, r.delta);
}

} // namespace

ModelData build_model(const SimConfig& cfg) {
    Grid g = build_grid(cfg);
    return ModelData::make(g, build_potential(cfg.v_n), build_potential(cfg.v_p),
                           build_doping(cfg, g), build_recombination(cfg.recombination),
                           cfg.epsilon);
}

StepScheme build_scheme(const SimConfig& cfg) {
    StepScheme s;
    s.flux = cfg.stepping.flux == "central_upwind" ? StepScheme::Flux::CentralUpwind
                                                   : StepScheme::Flux::ScharfetterGummel;
    s.dt_policy = cfg.stepping.dt_policy == "fixed" ? StepScheme::DtPolicy::Fixed
                                                    : StepScheme::DtPolicy::AutoPositivity;
    s.fixed_dt = cfg.stepping.dt;
    s.safety = cfg.stepping.safety;
    return s;
}

} // namespace ddp
