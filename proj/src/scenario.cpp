#include "djcm/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "djcm/oracle.hpp"

namespace djcm {

namespace fs = std::filesystem;
using json = nlohmann::json;

void RunManifest::validate() const {
    if (scenarios.empty()) throw UsageError("manifest: no scenarios");
    std::set<std::string> names;
    for (const auto& s : scenarios) {
        if (!names.insert(s.name).second) {
            throw UsageError("manifest: duplicate scenario name '" + s.name + "'");
        }
        if (s.steps < 2) throw UsageError("scenario '" + s.name + "': steps must be >= 2");
        if (!(s.t_max > 0.0)) throw UsageError("scenario '" + s.name + "': tmax must be > 0");
        try {
            s.config.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError("scenario '" + s.name + "': " + e.what());
        }
    }
    if (!(verify_tolerance > 0.0)) throw UsageError("manifest: tolerance must be > 0");
}

namespace {

struct Panel {
    double chi, delta1, delta3;
};

const std::map<char, Panel>& panels() {
    static const std::map<char, Panel> p{
        {'a', {0.0, 0.0, 0.0}},
        {'b', {0.4, 0.0, 0.0}},
        {'c', {0.0, 7.0, 15.0}},
        {'d', {0.4, 7.0, 15.0}},
    };
    return p;
}

std::vector<std::string> build_preset_names() {
    std::vector<std::string> names;
    for (int fig = 2; fig <= 7; ++fig) {
        for (char panel : {'a', 'b', 'c', 'd'}) {
            const std::string base = "fig" + std::to_string(fig) + panel;
            names.push_back(base);
            names.push_back(base + "-nonlinear");
        }
    }
    names.emplace_back("fig8a");
    names.emplace_back("fig8b");
    return names;
}

}  // namespace

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = build_preset_names();
    return names;
}

bool is_preset(const std::string& name) {
    const auto& names = preset_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

Scenario preset_scenario(const std::string& name) {
    if (!is_preset(name)) {
        throw UsageError("unknown preset '" + name + "' (see --list-presets)");
    }
    Scenario s;
    s.name = name;
    s.config = ModelConfig{};  // lambda 1, |alpha|^2 = 10

    const int fig = name[3] - '0';
    const char panel_char = name[4];
    const bool nonlinear = name.size() > 5 || fig == 8;

    if (fig == 8) {
        s.config.k = panel_char == 'a' ? 1 : 2;
        s.config.deform = Nonlinearity::harmonious();
        const Panel& p = panels().at('a');
        s.config.chi = p.chi;
        s.config.delta1 = p.delta1;
        s.config.delta3 = p.delta3;
        return s;
    }

    s.config.k = (fig % 2 == 0) ? 1 : 2;  // fig2/4/6 -> k=1, fig3/5/7 -> k=2
    s.config.deform = nonlinear ? Nonlinearity::harmonious() : Nonlinearity::constant();
    const Panel& p = panels().at(panel_char);
    s.config.chi = p.chi;
    s.config.delta1 = p.delta1;
    s.config.delta3 = p.delta3;
    return s;
}

namespace {

Nonlinearity deform_from_name(const std::string& name) {
    if (name == "constant") return Nonlinearity::constant();
    if (name == "harmonious") return Nonlinearity::harmonious();
    throw UsageError("deform must be 'constant' or 'harmonious', got '" + name + "'");
}

void apply_scenario_json(Scenario& s, const json& obj) {
    static const std::set<std::string> known{
        "name", "preset", "lambda", "alpha2", "k",     "chi",
        "delta1", "delta3", "deform", "tmax", "steps", "verify"};
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!known.contains(key)) {
            throw UsageError("manifest scenario: unknown key '" + key + "'");
        }
    }
    if (obj.contains("name")) s.name = obj.at("name").get<std::string>();
    if (obj.contains("lambda")) s.config.lambda = obj.at("lambda").get<double>();
    if (obj.contains("alpha2")) {
        const double a2 = obj.at("alpha2").get<double>();
        if (a2 < 0.0) throw UsageError("alpha2 must be >= 0");
        s.config.alpha = {std::sqrt(a2), 0.0};
    }
    if (obj.contains("k")) s.config.k = obj.at("k").get<int>();
    if (obj.contains("chi")) s.config.chi = obj.at("chi").get<double>();
    if (obj.contains("delta1")) s.config.delta1 = obj.at("delta1").get<double>();
    if (obj.contains("delta3")) s.config.delta3 = obj.at("delta3").get<double>();
    if (obj.contains("deform")) s.config.deform = deform_from_name(obj.at("deform").get<std::string>());
    if (obj.contains("tmax")) s.t_max = obj.at("tmax").get<double>();
    if (obj.contains("steps")) s.steps = obj.at("steps").get<int>();
    if (obj.contains("verify")) s.verify = obj.at("verify").get<bool>();
}

}  // namespace

RunManifest manifest_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open manifest file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw UsageError("manifest '" + path + "': " + e.what());
    }
    if (!doc.is_object()) throw UsageError("manifest: top level must be an object");

    static const std::set<std::string> known{"out", "tolerance", "scenarios"};
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (!known.contains(key)) throw UsageError("manifest: unknown key '" + key + "'");
    }

    RunManifest m;
    if (doc.contains("out")) m.out_dir = doc.at("out").get<std::string>();
    if (doc.contains("tolerance")) m.verify_tolerance = doc.at("tolerance").get<double>();
    if (!doc.contains("scenarios") || !doc.at("scenarios").is_array()) {
        throw UsageError("manifest: 'scenarios' array is required");
    }
    try {
        for (const auto& entry : doc.at("scenarios")) {
            Scenario s;
            if (entry.contains("preset")) {
                s = preset_scenario(entry.at("preset").get<std::string>());
            }
            apply_scenario_json(s, entry);
            m.scenarios.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw UsageError(std::string("manifest: ") + e.what());
    }
    m.validate();
    return m;
}

namespace {

// %.17g: shortest representation carrying 17 significant digits, which
// round-trips doubles exactly and keeps the CSVs byte-stable.
std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string csv_string(const TimeSeries& series) {
    std::string out = "t,entropy,concurrence,mandel_q,mean_n,mean_n2,sx,sy\n";
    for (const auto& r : series.records) {
        out += format_value(r.t);
        for (double v : {r.entropy, r.concurrence, r.mandel, r.mean_n, r.mean_n2, r.sx, r.sy}) {
            out += ',';
            out += format_value(v);
        }
        out += '\n';
    }
    return out;
}

std::string metadata_json(const Scenario& s, double verify_tolerance) {
    json meta;
    meta["name"] = s.name;
    meta["lambda"] = s.config.lambda;
    meta["alpha_re"] = s.config.alpha.real();
    meta["alpha_im"] = s.config.alpha.imag();
    meta["alpha2"] = std::norm(s.config.alpha);
    meta["k"] = s.config.k;
    meta["chi"] = s.config.chi;
    meta["delta1"] = s.config.delta1;
    meta["delta3"] = s.config.delta3;
    meta["deform"] = std::string(s.config.deform.name());
    meta["tmax"] = s.t_max;
    meta["steps"] = s.steps;
    meta["nmax"] = truncation_bound(s.config.alpha, 1e-12);
    meta["truncation_epsilon"] = 1e-12;
    meta["verify"] = s.verify;
    meta["verify_tolerance"] = verify_tolerance;
    meta["csv"] = s.name + ".csv";
    return meta.dump(2) + "\n";
}

std::string plot_script(const RunManifest& manifest) {
    std::ostringstream os;
    os << "#!/usr/bin/env python3\n"
          "# Panel plots (observable vs scaled time) for every scenario CSV in\n"
          "# this directory. Requires matplotlib.\n"
          "import csv\n"
          "import matplotlib\n"
          "matplotlib.use('Agg')\n"
          "import matplotlib.pyplot as plt\n"
          "\n"
          "SCENARIOS = [\n";
    for (const auto& s : manifest.scenarios) {
        os << "    '" << s.name << "',\n";
    }
    os << "]\n"
          "\n"
          "PANELS = [\n"
          "    ('entropy', 'S(t)'),\n"
          "    ('mandel_q', 'Q(t)'),\n"
          "    ('mean_n', '<n>(t)'),\n"
          "    ('sx', 'S_x(t)'),\n"
          "    ('sy', 'S_y(t)'),\n"
          "    ('concurrence', 'C(t)'),\n"
          "]\n"
          "\n"
          "for name in SCENARIOS:\n"
          "    with open(name + '.csv', newline='') as fh:\n"
          "        rows = list(csv.DictReader(fh))\n"
          "    t = [float(r['t']) for r in rows]\n"
          "    fig, axes = plt.subplots(3, 2, figsize=(10, 10), sharex=True)\n"
          "    for ax, (column, label) in zip(axes.flat, PANELS):\n"
          "        ax.plot(t, [float(r[column]) for r in rows], lw=0.7)\n"
          "        ax.set_ylabel(label)\n"
          "        ax.grid(alpha=0.3)\n"
          "    for ax in axes[-1]:\n"
          "        ax.set_xlabel('scaled time')\n"
          "    fig.suptitle(name)\n"
          "    fig.tight_layout()\n"
          "    fig.savefig(name + '.png', dpi=150)\n"
          "    plt.close(fig)\n"
          "    print('wrote', name + '.png')\n";
    return os.str();
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot open '" + path.string() + "' for writing");
    out << content;
    if (!out) throw std::ios_base::failure("write to '" + path.string() + "' failed");
}

}  // namespace

int run(const RunManifest& manifest, std::ostream& log) {
    manifest.validate();
    bool invariant_failure = false;
    try {
        fs::create_directories(manifest.out_dir);
        const fs::path out_dir(manifest.out_dir);
        write_file(out_dir / "plot.py", plot_script(manifest));

        for (const auto& s : manifest.scenarios) {
            log << "scenario " << s.name << ": ";
            const std::vector<double> grid = uniform_grid(s.t_max, s.steps);

            TimeSeries series;
            try {
                series = evolve_series(s.config, grid);
            } catch (const SeriesError& e) {
                log << "INVARIANT FAILURE: " << e.what() << "\n";
                std::string report = std::string(e.what()) + "\n";
                for (const auto& f : e.failures()) report += "  " + f + "\n";
                write_file(out_dir / (s.name + ".failure.txt"), report);
                invariant_failure = true;
                continue;
            }

            write_file(out_dir / (s.name + ".csv"), csv_string(series));
            write_file(out_dir / (s.name + ".meta.json"),
                       metadata_json(s, manifest.verify_tolerance));

            if (s.verify) {
                const TimeSeries reference = oracle_series(s.config, grid);
                const ComparisonReport report =
                    compare(series, reference, manifest.verify_tolerance);
                write_file(out_dir / (s.name + ".verify.txt"), report.to_string());
                log << (report.pass ? "ok, verified" : "VERIFICATION FAILED")
                    << " (worst column deviation " << report.worst() << ")\n";
                if (!report.pass) invariant_failure = true;
            } else {
                log << "ok\n";
            }
        }
    } catch (const std::ios_base::failure& e) {
        log << "I/O error: " << e.what() << "\n";
        return 3;
    } catch (const fs::filesystem_error& e) {
        log << "I/O error: " << e.what() << "\n";
        return 3;
    }
    return invariant_failure ? 1 : 0;
}

}  // namespace djcm
