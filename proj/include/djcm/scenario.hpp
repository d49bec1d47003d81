// Batch front end: named scenario presets mirroring the standard parameter
// panels, manifest parsing, CSV/metadata emission and oracle verification.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "djcm/model.hpp"
#include "djcm/observables.hpp"

namespace djcm {

class UsageError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Scenario {
    std::string name = "custom";
    ModelConfig config;
    double t_max = 50.0;  // scaled time
    int steps = 2001;
    bool verify = false;
};

struct RunManifest {
    std::vector<Scenario> scenarios;
    std::string out_dir = ".";
    double verify_tolerance = 1e-6;

    /// Throws UsageError on duplicate names, empty list or bad grids.
    void validate() const;
};

// Presets: fig{2..7}{a..d} with an optional "-nonlinear" suffix selecting the
// harmonious coupling, plus fig8a / fig8b (always harmonious). Panels:
//   a: chi = 0,   delta1 = 0, delta3 = 0
//   b: chi = 0.4, delta1 = 0, delta3 = 0
//   c: chi = 0,   delta1 = 7, delta3 = 15
//   d: chi = 0.4, delta1 = 7, delta3 = 15
// fig2/4/6 are single-photon (k = 1), fig3/5/7 two-photon (k = 2); fig8a and
// fig8b are k = 1 and k = 2 at panel-a parameters.
const std::vector<std::string>& preset_names();
bool is_preset(const std::string& name);
Scenario preset_scenario(const std::string& name);  // throws UsageError

/// Parses a JSON manifest file. Unknown keys are rejected with the offending
/// field named in the error.
RunManifest manifest_from_file(const std::string& path);

/// CSV serialisation: header t,entropy,concurrence,mandel_q,mean_n,mean_n2,sx,sy
/// and 17 significant digits per value, '\n' line endings.
std::string csv_string(const TimeSeries& series);

/// JSON sidecar with every resolved parameter and tolerance of a scenario.
std::string metadata_json(const Scenario& scenario, double verify_tolerance);

/// matplotlib script plotting every scenario CSV of the manifest.
std::string plot_script(const RunManifest& manifest);

/// Runs every scenario: writes <name>.csv, <name>.meta.json, plot.py and, for
/// verify scenarios, <name>.verify.txt. Returns a process exit code: 0 on
/// success, 1 when verification or a series invariant failed, 3 on I/O
/// failure.
int run(const RunManifest& manifest, std::ostream& log);

}  // namespace djcm
