#pragma once

#include <map>
#include <string>
#include <vector>

#include "gaugep/scenarios.hpp"
#include "gaugep/sde.hpp"

namespace gaugep::cli {

// Flat section.key -> value store. Empty or "auto" values are resolved
// per scenario when the run is built.
class RunConfig {
public:
    RunConfig();

    static RunConfig load(const std::string& path);
    void merge_file(const std::string& path);
    void set(const std::string& assignment);  // section.key=value
    void set(const std::string& key, const std::string& value);

    const std::string& get(const std::string& key) const;
    bool is_auto(const std::string& key) const;
    double number(const std::string& key) const;
    long integer(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::vector<double> numbers(const std::string& key) const;

    std::string serialize() const;  // canonical INI, sorted
    std::string hash() const;       // SHA-256 of serialize()

private:
    std::map<std::string, std::string> v_;
};

// Everything a run needs, resolved from a config.
struct ResolvedRun {
    std::string scenario;
    Scenario sc;
    Method method = Method::gaugeP;
    GaugeConfig gauge;
    StepperConfig stepper;
    RunOptions options;
    int n_traj = 0;
    std::uint64_t seed = 0;
    std::vector<double> grid;
    double t_opt = 0.0;
    double t_fin = 0.0;
};

Scenario build_scenario(const RunConfig& c);
ResolvedRun resolve(const RunConfig& c);
Method parse_method(const std::string& s);

}  // namespace gaugep::cli
