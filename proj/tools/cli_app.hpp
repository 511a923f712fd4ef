#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cmalab/config.hpp"
#include "cmalab/ma_solver.hpp"

namespace cmalab::cli {

inline constexpr const char* kOutputDirEnv = "CMALAB_OUTPUT_DIR";

struct RunConfig {
    std::string subcommand;

    int n = 1;
    double degree = 2.0;
    double s_min = -40.0;
    double s_max = 40.0;
    long long points = 4001;

    EquationKind kind = EquationKind::neutral;
    double t = 0.0;
    double t_target = 0.9;

    std::string rhs_kind = "constant";
    double gamma = 0.0;
    double epsilon = 1e-3;
    std::vector<double> epsilon_list{1e-1, 1e-2, 1e-3, 1e-4};
    double delta_prime = 0.0;

    double newton_tol = 1e-10;
    int max_iters = 50;
    int max_halvings = 20;
    double dt_initial = 0.05;
    double dt_min = 1e-6;
    double growth = 1.5;
    double blowup_threshold = 50.0;
    unsigned workers = 0;

    std::string name;
    double tau0 = 0.2;
    std::string output;

    std::string source = "sweep";
    double tau = 0.5;
    std::vector<double> tau_nu_list{3.5};
    std::optional<double> curvature_margin;

    int slope_n_min = 2;
    int slope_n_max = 2;
};

// Reads and validates every field; errors name the offending line and key.
RunConfig load_config(const ConfigFile& file, const std::string& subcommand);

// Effective configuration as key = value text; parsing it back reproduces the run.
std::string echo_config(const RunConfig& cfg);

// Entry point shared by the executable and the tests. Returns the exit status:
// 0 success, 1 barrier or non-convergence, 2 invalid configuration.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cmalab::cli
