#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>

#include "bioconv/certificate.hpp"
#include "bioconv/model.hpp"
#include "bioconv/operators.hpp"
#include "bioconv/solver.hpp"

namespace bioconv {

/// Syntax errors carry the 1-based line; semantic errors the key path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line, std::string key)
        : std::runtime_error(what), line_(line), key_(std::move(key)) {}
    [[nodiscard]] int line() const { return line_; }
    [[nodiscard]] const std::string& key() const { return key_; }

private:
    int line_;
    std::string key_;
};

enum class ParameterBlock { dimensionless, physical };

struct ConsumptionConfig {
    std::string kind = "bump";  ///< bump | tent
    double c_star = 1.0;
    double width = 0.5;
};

struct SourceConfig {
    std::string f_n = "zero";  ///< zero | cosine
    double f_n_amplitude = 0.0;
    std::string f_c = "zero";  ///< zero | cosine
    double f_c_amplitude = 0.0;
    std::string F = "zero";    ///< zero | shear
    double F_amplitude = 0.0;
    bool project_f_n = false;  ///< remove the discrete mean of the sampled f_n
};

struct SolverConfig {
    double tolerance = 1e-10;
    int max_outer = 200;
    double relaxation = 1.0;
    double linear_tolerance = 1e-12;
    int linear_max_iterations = 4000;
    OxygenTopBc oxygen_top = OxygenTopBc::neumann;
    bool strict = false;
};

struct RunConfig {
    std::array<double, 3> edges{1.0, 1.0, 1.0};
    std::array<int, 3> cells{16, 16, 16};
    ParameterBlock block = ParameterBlock::dimensionless;
    DimensionlessGroups groups{1.0, 0.0, 0.0, 1.0, 0.0};
    double gravity = 1.0;
    std::optional<PhysicalParams> physical;
    ConsumptionConfig consumption;
    SourceConfig sources;
    double alpha1 = 1.0;
    double alpha2 = 1.0;
    ConstantsMode constants_mode = ConstantsMode::analytic;
    ConstantOverrides overrides;
    SolverConfig solver;
    std::string output_directory = "out";
    std::string output_prefix = "state";
};

/// Parses the key-value grammar documented in docs/config.md. Unknown
/// sections and keys are rejected; exactly one of [dimensionless] and
/// [physical] must be present.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical JSON form with every default filled in.
std::string config_to_json(const RunConfig& cfg, int indent = 2);

ChamberDomain make_domain(const RunConfig& cfg);
MacGrid make_grid(const RunConfig& cfg);
ConsumptionFunction make_consumption(const RunConfig& cfg);

/// Exact L2 norms over the box of the selected source profiles.
struct SourceNorms {
    double f_n = 0.0;
    double f_c = 0.0;
    double F = 0.0;
};
SourceNorms source_norms(const RunConfig& cfg);

/// Sources sampled on the grid, plus everything else the solver needs.
ProblemData make_problem(const RunConfig& cfg, const MacGrid& grid);
ProblemData make_problem(const RunConfig& cfg);

PicardOptions make_picard_options(const RunConfig& cfg);

/// Certificate for the configuration (domain constants per the constants
/// block, declared overrides applied).
Certificate make_certificate(const RunConfig& cfg);

}  // namespace bioconv
