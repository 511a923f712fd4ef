#include "cli_app.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <utility>

#include "cmalab/comparison.hpp"
#include "cmalab/errors.hpp"
#include "cmalab/multiplier_sheaf.hpp"
#include "cmalab/slope_stability.hpp"

namespace cmalab::cli {
namespace {

const std::vector<std::string> kAllowedKeys = {
    "model.n",           "model.degree",        "model.s_min",       "model.s_max",
    "model.points",      "equation.kind",       "equation.t",        "equation.t_target",
    "rhs.kind",          "rhs.gamma",           "rhs.epsilon",       "rhs.epsilon_list",
    "rhs.delta_prime",   "solver.newton_tol",   "solver.max_iters",  "solver.max_halvings",
    "solver.dt_initial", "solver.dt_min",       "solver.growth",     "solver.blowup_threshold",
    "solver.workers",    "experiment.name",     "experiment.tau0",   "experiment.output",
    "multiplier.source", "multiplier.tau",      "multiplier.tau_nu_list",
    "multiplier.curvature_margin",              "slope.n",           "slope.n_min",
    "slope.n_max"};

const std::vector<std::pair<std::string, std::string>> kSubcommands = {
    {"solve", "single Newton solve at fixed t"},
    {"continuity", "continuation in t up to equation.t_target"},
    {"sweep", "continuation in epsilon over rhs.epsilon_list"},
    {"magnify", "magnifying sweep with bootstrap Lelong schedule"},
    {"multiplier", "multiplier ideal stalk from a sequence of potentials"},
    {"verify", "built-in self-checks against closed forms and oracles"},
    {"slope", "tangent bundle slope destabilization over slope.n_min..slope.n_max"}};

std::string list_text(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_real(v[i]);
    return s;
}

// Raises a located error for (section, key), falling back to a generic message
// when the key was defaulted.
[[noreturn]] void reject(const ConfigFile& f, const char* section, const char* key, const std::string& msg) {
    if (const auto* e = f.find(section, key)) f.fail(*e, msg);
    throw ConfigurationError(f.source() + ": [" + section + "] " + key + ": " + msg);
}

void require(bool ok, const ConfigFile& f, const char* section, const char* key, const std::string& msg) {
    if (!ok) reject(f, section, key, msg);
}

RadialPotential plain_potential(const KahlerModel& model, std::span<const double> phi) {
    std::vector<double> u(phi.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = model.psi().values[i] + phi[i];
    return RadialPotential(model.grid(), model.n(), std::move(u));
}

// ---------------------------------------------------------------------------
// Output

class Output {
public:
    Output(const RunConfig& cfg, std::filesystem::path dir) : cfg_(cfg), dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
        std::ostringstream h;
        h << "# ; cmalab " << cfg.subcommand << '\n';
        std::istringstream body(echo_config(cfg));
        std::string line;
        while (std::getline(body, line)) h << "# " << line << '\n';
        header_ = h.str();
    }

    std::filesystem::path path(const std::string& suffix) const { return dir_ / (cfg_.name + suffix); }

    void write(const std::string& suffix, const std::string& body, bool with_header = true) const {
        std::ofstream f(path(suffix), std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + path(suffix).string());
        if (with_header) f << header_;
        f << body;
        if (!f) throw std::runtime_error("write failed for " + path(suffix).string());
    }

    void curve(const std::string& suffix, const std::string& xlabel, const std::string& ylabel,
               const std::vector<double>& x, const std::vector<double>& y) const {
        std::ostringstream os;
        os << "# " << xlabel << ' ' << ylabel << '\n';
        for (std::size_t i = 0; i < x.size(); ++i) os << format_real(x[i]) << ' ' << format_real(y[i]) << '\n';
        write(suffix, os.str(), false);
    }

private:
    const RunConfig& cfg_;
    std::filesystem::path dir_;
    std::string header_;
};

const char* kCsvColumns = "step,param,sup_phi,inf_phi,avg_phi,lelong,lelong_sensitivity,mass,newton_iters,converged";

void csv_row(std::ostream& os, std::size_t step, double param, const Diagnostics& d, int iters, bool converged) {
    os << step << ',' << format_real(param) << ',' << format_real(d.sup_phi) << ',' << format_real(d.inf_phi) << ','
       << format_real(d.avg_phi) << ',' << format_real(d.lelong.value) << ',' << format_real(d.lelong.sensitivity)
       << ',' << format_real(d.mass) << ',' << iters << ',' << (converged ? 1 : 0);
}

std::string trace_csv(const ContinuityTrace& trace) {
    std::ostringstream os;
    os << kCsvColumns << '\n';
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const TraceStep& s = trace.steps[i];
        csv_row(os, i, s.param, s.diagnostics, s.newton_iters, s.converged);
        os << '\n';
    }
    return os.str();
}

void summary_line(std::ostream& os, const std::string& key, const std::string& value) {
    os << key << " = " << value << '\n';
}

void diagnostics_summary(std::ostream& os, const Diagnostics& d) {
    summary_line(os, "sup_phi", format_real(d.sup_phi));
    summary_line(os, "inf_phi", format_real(d.inf_phi));
    summary_line(os, "avg_phi", format_real(d.avg_phi));
    summary_line(os, "lelong", format_real(d.lelong.value));
    summary_line(os, "lelong_sensitivity", format_real(d.lelong.sensitivity));
    summary_line(os, "lelong_anchor", format_real(d.lelong.anchor));
    summary_line(os, "mass", format_real(d.mass));
}

// ---------------------------------------------------------------------------
// Experiments

struct Context {
    const RunConfig& cfg;
    const Output& out;
    std::ostream& log;
};

KahlerModel make_model(const RunConfig& c) {
    return KahlerModel(c.n, c.degree, SGrid(c.s_min, c.s_max, static_cast<std::size_t>(c.points)));
}

RhsFamily make_rhs(const RunConfig& c, const KahlerModel& model, double eps) {
    if (c.rhs_kind == "dirac") return build_dirac_rhs(c.gamma, eps, model);
    if (c.rhs_kind == "divisor") return build_divisor_rhs(c.delta_prime, eps, model);
    return build_constant_rhs(model);
}

Stepping make_stepping(const RunConfig& c) {
    Stepping s;
    s.dt_initial = c.dt_initial;
    s.dt_min = c.dt_min;
    s.growth = c.growth;
    s.blowup_threshold = c.blowup_threshold;
    s.solve.newton_tol = c.newton_tol;
    s.solve.max_iters = c.max_iters;
    s.solve.max_halvings = c.max_halvings;
    return s;
}

void emit_warnings(const RhsFamily& f, std::ostream& log) {
    for (const auto& w : f.warnings()) log << "warning: " << w << '\n';
}

int run_solve(const Context& ctx) {
    const RunConfig& c = ctx.cfg;
    const KahlerModel model = make_model(c);
    const RhsFamily rhs = make_rhs(c, model, c.epsilon);
    emit_warnings(rhs, ctx.log);
    SolveConfig sc = make_stepping(c).solve;
    const SolveResult r = newton_solve(model, rhs, {c.kind, c.t}, sc);

    std::ostringstream csv;
    csv << kCsvColumns << '\n';
    csv_row(csv, 0, c.t, r.diagnostics, r.iterations, r.converged);
    csv << '\n';
    ctx.out.write("_diagnostics.csv", csv.str());

    std::ostringstream sum;
    summary_line(sum, "converged", r.converged ? "true" : "false");
    summary_line(sum, "iterations", std::to_string(r.iterations));
    summary_line(sum, "residual_norm", format_real(r.residual_norm));
    diagnostics_summary(sum, r.diagnostics);
    if (!r.message.empty()) summary_line(sum, "message", r.message);
    ctx.out.write("_summary.txt", sum.str());
    ctx.log << sum.str();

    const SGrid& g = model.grid();
    std::vector<double> s(g.size()), slope(r.u.d1);
    for (std::size_t i = 0; i < g.size(); ++i) s[i] = g.node(i);
    ctx.out.curve("_phi.dat", "s", "phi", s, r.phi);
    ctx.out.curve("_slope.dat", "s", "u_prime", s, slope);
    ctx.out.curve("_density.dat", "s", "reduced_ma_density", s, reduced_density(r.u));
    return r.converged ? 0 : 1;
}

int write_trace(const Context& ctx, const ContinuityTrace& trace, const std::string& xlabel) {
    ctx.out.write("_diagnostics.csv", trace_csv(trace));
    std::ostringstream sum;
    summary_line(sum, "verdict", std::string(to_string(trace.verdict)));
    summary_line(sum, "t_star", trace.t_star ? format_real(*trace.t_star) : "none");
    summary_line(sum, "steps", std::to_string(trace.steps.size()));
    summary_line(sum, "final_param", format_real(trace.steps.back().param));
    diagnostics_summary(sum, trace.steps.back().diagnostics);
    ctx.out.write("_summary.txt", sum.str());
    ctx.log << sum.str();

    std::vector<double> x, avg, nu;
    for (const TraceStep& s : trace.steps) {
        x.push_back(s.param);
        avg.push_back(s.diagnostics.avg_phi);
        nu.push_back(s.diagnostics.lelong.value);
    }
    ctx.out.curve("_avg_phi.dat", xlabel, "avg_phi", x, avg);
    ctx.out.curve("_lelong.dat", xlabel, "lelong", x, nu);
    return trace.verdict == Verdict::barrier ? 1 : 0;
}

int run_continuity(const Context& ctx) {
    const RunConfig& c = ctx.cfg;
    const KahlerModel model = make_model(c);
    const RhsFamily rhs = make_rhs(c, model, c.epsilon);
    emit_warnings(rhs, ctx.log);
    const ContinuityTrace trace = continuity_in_t(model, rhs, c.kind, c.t_target, make_stepping(c));
    const SGrid& g = model.grid();
    std::vector<double> s(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) s[i] = g.node(i);
    ctx.out.curve("_phi.dat", "s", "phi", s, trace.steps.back().phi);
    return write_trace(ctx, trace, "t");
}

int run_sweep(const Context& ctx) {
    const RunConfig& c = ctx.cfg;
    const KahlerModel model = make_model(c);
    SweepOptions opt{make_stepping(c), c.workers};
    const ContinuityTrace trace = sweep_epsilon(model, c.gamma, c.kind, c.tau0, c.epsilon_list, opt);
    return write_trace(ctx, trace, "eps");
}

int run_magnify(const Context& ctx) {
    const RunConfig& c = ctx.cfg;
    const KahlerModel model = make_model(c);
    SweepOptions opt{make_stepping(c), c.workers};
    const MagnificationTable table = magnification_experiment(model, c.gamma, c.tau0, c.epsilon_list, opt);

    std::ostringstream csv;
    csv << kCsvColumns << ",nu_measured,nu_bootstrap\n";
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const MagnificationRow& r = table.rows[i];
        csv_row(csv, i, r.epsilon, r.diagnostics, r.newton_iters, r.converged);
        csv << ',' << format_real(r.nu_measured) << ',' << format_real(r.nu_bootstrap) << '\n';
    }
    ctx.out.write("_diagnostics.csv", csv.str());

    std::ostringstream sum;
    summary_line(sum, "verdict", std::string(to_string(table.verdict)));
    summary_line(sum, "t_star", table.t_star ? format_real(*table.t_star) : "none");
    summary_line(sum, "avg_phi_strictly_increasing", table.avg_strictly_increasing ? "true" : "false");
    summary_line(sum, "precondition_tau0_below_margin", table.precondition_met ? "true" : "false");
    std::vector<double> eps, avg, nu, nub, nun;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const MagnificationRow& r = table.rows[i];
        const std::string p = "row." + std::to_string(i) + ".";
        summary_line(sum, p + "epsilon", format_real(r.epsilon));
        summary_line(sum, p + "avg_phi", format_real(r.diagnostics.avg_phi));
        summary_line(sum, p + "nu_measured", format_real(r.nu_measured));
        summary_line(sum, p + "nu_neutral", format_real(r.nu_neutral));
        summary_line(sum, p + "nu_bootstrap", format_real(r.nu_bootstrap));
        summary_line(sum, p + "curvature_margin", format_real(r.curvature_margin));
        summary_line(sum, p + "verdict", std::string(to_string(r.verdict)));
        eps.push_back(r.epsilon);
        avg.push_back(r.diagnostics.avg_phi);
        nu.push_back(r.nu_measured);
        nub.push_back(r.nu_bootstrap);
        nun.push_back(r.nu_neutral);
    }
    ctx.out.write("_summary.txt", sum.str());
    ctx.log << sum.str();
    ctx.out.curve("_avg_phi.dat", "eps", "avg_phi", eps, avg);
    ctx.out.curve("_nu_measured.dat", "eps", "nu_measured", eps, nu);
    ctx.out.curve("_nu_bootstrap.dat", "eps", "nu_bootstrap", eps, nub);
    ctx.out.curve("_nu_neutral.dat", "eps", "nu_neutral", eps, nun);
    return table.verdict == Verdict::barrier ? 1 : 0;
}

int run_multiplier(const Context& ctx) {
    const RunConfig& c = ctx.cfg;
    const KahlerModel model = make_model(c);
    PotentialSequence seq{model, {}};
    double eta = 0.0;
    int status = 0;
    if (c.source == "synthetic") {
        // phi = -nu log(1 + e^{-s}): slope nu at the pole, flat at infinity.
        const RhsFamily f = build_constant_rhs(model);
        eta = check_lower_bound(f, model).eta;
        const SGrid& g = model.grid();
        for (double tn : c.tau_nu_list) {
            std::vector<double> phi(g.size());
            for (std::size_t i = 0; i < g.size(); ++i) phi[i] = -(tn / c.tau) * softplus(-g.node(i));
            seq.entries.push_back({std::move(phi), c.tau, f});
        }
    } else {
        SweepOptions opt{make_stepping(c), c.workers};
        const std::vector<ContinuityTrace> runs =
            epsilon_members(model, c.gamma, EquationKind::magnifying, c.tau0, c.epsilon_list, opt);
        eta = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < runs.size(); ++i) {
            const RhsFamily f = build_dirac_rhs(c.gamma, c.epsilon_list[i], model);
            eta = std::min(eta, check_lower_bound(f, model).eta);
            if (runs[i].verdict == Verdict::barrier) status = 1;
            const TraceStep& last = runs[i].steps.back();
            if (!(last.param > 0.0)) continue;
            seq.entries.push_back({last.phi, last.param, f});
        }
        if (seq.entries.empty()) {
            ctx.log << "no converged member reached a positive time; nothing to analyse\n";
            return 1;
        }
    }
    if (c.curvature_margin) eta = *c.curvature_margin;
    const StalkDescriptor stalk = stalk_from_sequence(seq);
    const TrivialLemmaReport rep = trivial_lemma_report(stalk, eta);

    std::ostringstream sum;
    summary_line(sum, "k_min", std::to_string(stalk.k_min));
    summary_line(sum, "nontrivial", stalk.nontrivial ? "true" : "false");
    summary_line(sum, "equals_maximal_ideal", stalk.equals_maximal_ideal ? "true" : "false");
    summary_line(sum, "tau_nu_product", format_real(stalk.tau_nu_product));
    summary_line(sum, "germ_check_consistent", stalk.germ_check_consistent ? "true" : "false");
    summary_line(sum, "curvature_margin", format_real(eta));
    summary_line(sum, "hypothesis.nontrivial", rep.nontrivial ? "pass" : "fail");
    summary_line(sum, "hypothesis.curvature_bound", rep.curvature_bound ? "pass" : "fail");
    summary_line(sum, "hypothesis.maximal_ideal_excluded", rep.maximal_ideal_excluded ? "pass" : "fail");
    summary_line(sum, "all_checkable_pass", rep.all_checkable_pass ? "true" : "false");
    for (std::size_t i = 0; i < rep.notes.size(); ++i) summary_line(sum, "note." + std::to_string(i), rep.notes[i]);
    ctx.out.write("_summary.txt", sum.str());
    ctx.log << sum.str();

    std::vector<double> idx, products;
    for (std::size_t i = 0; i < seq.entries.size(); ++i) {
        const SequenceEntry& e = seq.entries[i];
        const LelongWindow w = lelong_window(e.rhs);
        idx.push_back(static_cast<double>(i));
        products.push_back(e.tau * lelong_estimate(plain_potential(model, e.phi), w.width, w.anchor).value);
    }
    ctx.out.curve("_tau_nu.dat", "entry", "tau_nu", idx, products);
    return status;
}

int run_slope(const Context& ctx) {
    const RunConfig& c = ctx.cfg;
    std::ostringstream sum;
    for (int n = c.slope_n_min; n <= c.slope_n_max; ++n) {
        const BundleSpec v = tangent_restricted_to_line(n);
        const BundleSpec w = line_tangent();
        const bool d = destabilizes(w, v);
        sum << "n = " << n << ": (n+1)/n = " << normalized_slope(v).str() << ", T_C slope = " << normalized_slope(w).str()
            << ", destabilizes = " << (d ? "true" : "false") << '\n';
    }
    ctx.out.write("_summary.txt", sum.str());
    ctx.log << sum.str();
    return 0;
}

int run_verify(const Context& ctx) {
    const RunConfig& c = ctx.cfg;
    const KahlerModel model = make_model(c);
    const SGrid& g = model.grid();
    const int n = model.n();
    struct Check {
        std::string name;
        bool pass;
        double value;
    };
    std::vector<Check> checks;

    {  // F = 1 fixed point from a perturbed start
        const RhsFamily one = build_constant_rhs(model);
        std::vector<double> v(model.psi().values);
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double s = g.node(i);
            v[i] += 0.3 * std::sin(s) / std::cosh(s);
        }
        SolveConfig sc = make_stepping(c).solve;
        sc.initial_guess = RadialPotential(g, n, std::move(v));
        const SolveResult r = newton_solve(model, one, {EquationKind::magnifying, 0.5}, sc);
        const double sup = std::max(std::abs(r.diagnostics.sup_phi), std::abs(r.diagnostics.inf_phi));
        // The tails degenerate faster for larger n, which leaves more of the residual in phi.
        const double bound = n <= 2 ? 1e-9 : 1e-6;
        checks.push_back({"fixed_point_sup_phi", r.converged && sup <= bound, sup});
    }
    {  // neutral solve against the quadrature oracle
        const double gamma = std::min(1.0, model.degree());
        const RhsFamily f = build_dirac_rhs(gamma, 1e-3, model);
        const RadialPotential orc = neutral_oracle(model, f);
        const SolveResult r = newton_solve(model, f, {EquationKind::neutral, 0.0});
        double diff = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) diff = std::max(diff, std::abs(orc.values[i] - r.u.values[i]));
        checks.push_back({"neutral_oracle_sup_diff", r.converged && diff <= 1e-6, diff});
        const double rel = std::abs(r.diagnostics.lelong.value - gamma) / gamma;
        checks.push_back({"neutral_lelong_rel_error", rel <= 0.02, rel});
        const double m = std::abs(reduced_mass(f) - model.reference_mass());
        checks.push_back({"dirac_rhs_mass_error", m <= 1e-8, m});
    }
    {  // anticanonical Einstein identity
        const KahlerModel ac(n, n + 1.0, g);
        const std::vector<double> rho = ricci_potential(ac.psi());
        double worst = 0.0;
        for (std::size_t i = 1; i + 1 < rho.size(); ++i) {
            const double a = rho[i - 1] - ac.psi().values[i - 1];
            const double b = rho[i] - ac.psi().values[i];
            const double d = rho[i + 1] - ac.psi().values[i + 1];
            worst = std::max(worst, std::abs(a - 2.0 * b + d));
        }
        checks.push_back({"einstein_second_difference", worst <= 1e-8, worst});
        const double eta = check_lower_bound(build_constant_rhs(ac), ac).eta;
        checks.push_back({"anticanonical_curvature_margin_error", std::abs(eta - (n + 1)) <= 1e-6,
                          std::abs(eta - (n + 1))});
    }
    {
        bool all = true;
        for (int k = 2; k <= 64; ++k) all = all && destabilizes(line_tangent(), tangent_restricted_to_line(k));
        checks.push_back({"slope_destabilizes_2_to_64", all, all ? 1.0 : 0.0});
    }

    std::ostringstream sum;
    bool ok = true;
    for (const Check& ch : checks) {
        sum << (ch.pass ? "PASS " : "FAIL ") << ch.name << " = " << format_real(ch.value) << '\n';
        ok = ok && ch.pass;
    }
    summary_line(sum, "verified", ok ? "true" : "false");
    ctx.out.write("_summary.txt", sum.str());
    ctx.log << sum.str();
    return ok ? 0 : 1;
}

}  // namespace

RunConfig load_config(const ConfigFile& f, const std::string& subcommand) {
    f.reject_unknown(kAllowedKeys);
    RunConfig c;
    c.subcommand = subcommand;

    if (auto v = f.get_int("model", "n")) {
        require(*v >= 1 && *v <= 16, f, "model", "n", "must lie in 1..16");
        c.n = static_cast<int>(*v);
    }
    c.degree = f.get_double("model", "degree").value_or(c.n + 1.0);
    require(c.degree > 0.0, f, "model", "degree", "must be positive");
    c.s_min = f.get_double("model", "s_min").value_or(c.s_min);
    c.s_max = f.get_double("model", "s_max").value_or(c.s_max);
    require(c.s_min < c.s_max, f, "model", "s_max", "must exceed s_min");
    c.points = f.get_int("model", "points").value_or(c.points);
    require(c.points >= 7 && c.points <= 2000001, f, "model", "points", "must lie in 7..2000001");

    if (auto v = f.get_string("equation", "kind")) {
        try {
            c.kind = parse_equation_kind(*v);
        } catch (const ConfigurationError& e) {
            reject(f, "equation", "kind", e.what());
        }
    }
    c.t = f.get_double("equation", "t").value_or(c.t);
    require(c.t >= 0.0 && c.t < 1.0, f, "equation", "t", "must lie in [0, 1)");
    c.t_target = f.get_double("equation", "t_target").value_or(c.t_target);
    require(c.t_target >= 0.0 && c.t_target < 1.0, f, "equation", "t_target", "must lie in [0, 1)");

    c.rhs_kind = f.get_string("rhs", "kind").value_or(c.rhs_kind);
    require(c.rhs_kind == "constant" || c.rhs_kind == "dirac" || c.rhs_kind == "divisor", f, "rhs", "kind",
            "expected constant, dirac or divisor");
    c.gamma = f.get_double("rhs", "gamma").value_or(c.gamma);
    require(c.gamma >= 0.0, f, "rhs", "gamma", "must be nonnegative");
    require(c.gamma <= c.degree, f, "rhs", "gamma", "exceeds the degree " + format_real(c.degree));
    c.epsilon = f.get_double("rhs", "epsilon").value_or(c.epsilon);
    require(c.epsilon > 0.0 || (c.rhs_kind == "divisor" && c.epsilon == 0.0), f, "rhs", "epsilon",
            "must be positive");
    c.epsilon_list = f.get_list("rhs", "epsilon_list").value_or(c.epsilon_list);
    for (std::size_t i = 0; i < c.epsilon_list.size(); ++i) {
        require(c.epsilon_list[i] > 0.0, f, "rhs", "epsilon_list", "values must be positive");
        require(i == 0 || c.epsilon_list[i] < c.epsilon_list[i - 1], f, "rhs", "epsilon_list",
                "must be strictly decreasing");
    }
    c.delta_prime = f.get_double("rhs", "delta_prime").value_or(c.delta_prime);
    require(c.delta_prime >= 0.0, f, "rhs", "delta_prime", "must be nonnegative");
    require(c.delta_prime < c.n, f, "rhs", "delta_prime", "must be below n (finite mass)");

    c.newton_tol = f.get_double("solver", "newton_tol").value_or(c.newton_tol);
    require(c.newton_tol > 0.0, f, "solver", "newton_tol", "must be positive");
    if (auto v = f.get_int("solver", "max_iters")) {
        require(*v >= 1 && *v <= 10000, f, "solver", "max_iters", "must lie in 1..10000");
        c.max_iters = static_cast<int>(*v);
    }
    if (auto v = f.get_int("solver", "max_halvings")) {
        require(*v >= 0 && *v <= 60, f, "solver", "max_halvings", "must lie in 0..60");
        c.max_halvings = static_cast<int>(*v);
    }
    c.dt_initial = f.get_double("solver", "dt_initial").value_or(c.dt_initial);
    require(c.dt_initial > 0.0, f, "solver", "dt_initial", "must be positive");
    c.dt_min = f.get_double("solver", "dt_min").value_or(c.dt_min);
    require(c.dt_min > 0.0, f, "solver", "dt_min", "must be positive");
    c.growth = f.get_double("solver", "growth").value_or(c.growth);
    require(c.growth >= 1.0, f, "solver", "growth", "must be at least 1");
    c.blowup_threshold = f.get_double("solver", "blowup_threshold").value_or(c.blowup_threshold);
    require(c.blowup_threshold > 0.0, f, "solver", "blowup_threshold", "must be positive");
    if (auto v = f.get_int("solver", "workers")) {
        require(*v >= 0 && *v <= 1024, f, "solver", "workers", "must lie in 0..1024");
        c.workers = static_cast<unsigned>(*v);
    }

    c.name = f.get_string("experiment", "name").value_or(subcommand);
    require(!c.name.empty() && c.name.find_first_of("/\\") == std::string::npos, f, "experiment", "name",
            "must be a plain file stem");
    c.tau0 = f.get_double("experiment", "tau0").value_or(c.tau0);
    require(c.tau0 > 0.0 && c.tau0 < 1.0, f, "experiment", "tau0", "must lie in (0, 1)");
    c.output = f.get_string("experiment", "output").value_or("");

    c.source = f.get_string("multiplier", "source").value_or(c.source);
    require(c.source == "sweep" || c.source == "synthetic", f, "multiplier", "source",
            "expected sweep or synthetic");
    c.tau = f.get_double("multiplier", "tau").value_or(c.tau);
    require(c.tau > 0.0 && c.tau < 1.0, f, "multiplier", "tau", "must lie in (0, 1)");
    c.tau_nu_list = f.get_list("multiplier", "tau_nu_list").value_or(c.tau_nu_list);
    for (double x : c.tau_nu_list) require(x >= 0.0, f, "multiplier", "tau_nu_list", "values must be nonnegative");
    c.curvature_margin = f.get_double("multiplier", "curvature_margin");

    if (auto v = f.get_int("slope", "n")) {
        require(*v >= 1 && *v <= 100000, f, "slope", "n", "must lie in 1..100000");
        c.slope_n_min = c.slope_n_max = static_cast<int>(*v);
    }
    if (auto v = f.get_int("slope", "n_min")) {
        require(*v >= 1 && *v <= 100000, f, "slope", "n_min", "must lie in 1..100000");
        c.slope_n_min = static_cast<int>(*v);
    }
    if (auto v = f.get_int("slope", "n_max")) {
        require(*v >= 1 && *v <= 100000, f, "slope", "n_max", "must lie in 1..100000");
        c.slope_n_max = static_cast<int>(*v);
    }
    require(c.slope_n_min <= c.slope_n_max, f, "slope", "n_max", "must not be below n_min");
    if (subcommand == "slope") {
        require(c.slope_n_min >= 2, f, "slope", c.slope_n_min == c.slope_n_max ? "n" : "n_min",
                "precondition: T_C must be a proper subbundle, which needs n >= 2");
    }
    if (subcommand == "continuity") {
        require(c.kind != EquationKind::neutral, f, "equation", "kind",
                "continuity needs a reducing or magnifying equation");
    }
    if (subcommand == "sweep" || subcommand == "magnify" || (subcommand == "multiplier" && c.source == "sweep")) {
        require(c.gamma > 0.0 || subcommand == "sweep", f, "rhs", "gamma", "must be positive for this experiment");
    }
    return c;
}

std::string echo_config(const RunConfig& c) {
    std::ostringstream os;
    os << "[model]\n"
       << "n = " << c.n << '\n'
       << "degree = " << format_real(c.degree) << '\n'
       << "s_min = " << format_real(c.s_min) << '\n'
       << "s_max = " << format_real(c.s_max) << '\n'
       << "points = " << c.points << '\n'
       << "[equation]\n"
       << "kind = " << to_string(c.kind) << '\n'
       << "t = " << format_real(c.t) << '\n'
       << "t_target = " << format_real(c.t_target) << '\n'
       << "[rhs]\n"
       << "kind = " << c.rhs_kind << '\n'
       << "gamma = " << format_real(c.gamma) << '\n'
       << "epsilon = " << format_real(c.epsilon) << '\n'
       << "epsilon_list = " << list_text(c.epsilon_list) << '\n'
       << "delta_prime = " << format_real(c.delta_prime) << '\n'
       << "[solver]\n"
       << "newton_tol = " << format_real(c.newton_tol) << '\n'
       << "max_iters = " << c.max_iters << '\n'
       << "max_halvings = " << c.max_halvings << '\n'
       << "dt_initial = " << format_real(c.dt_initial) << '\n'
       << "dt_min = " << format_real(c.dt_min) << '\n'
       << "growth = " << format_real(c.growth) << '\n'
       << "blowup_threshold = " << format_real(c.blowup_threshold) << '\n'
       << "workers = " << c.workers << '\n'
       << "[experiment]\n"
       << "name = " << c.name << '\n'
       << "tau0 = " << format_real(c.tau0) << '\n'
       << "[multiplier]\n"
       << "source = " << c.source << '\n'
       << "tau = " << format_real(c.tau) << '\n'
       << "tau_nu_list = " << list_text(c.tau_nu_list) << '\n';
    if (c.curvature_margin) os << "curvature_margin = " << format_real(*c.curvature_margin) << '\n';
    os << "[slope]\n"
       << "n_min = " << c.slope_n_min << '\n'
       << "n_max = " << c.slope_n_max << '\n';
    return os.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Radial complex Monge-Ampere laboratory"};
    app.require_subcommand(1, 1);
    std::string config_path, header_path, out_dir;
    std::vector<std::string> overrides;
    bool quiet = false;
    for (const auto& [name, description] : kSubcommands) {
        CLI::App* sub = app.add_subcommand(name, description);
        sub->add_option("-c,--config", config_path, "key = value configuration file");
        sub->add_option("--config-from", header_path, "reuse the configuration echoed in an output file");
        sub->add_option("-s,--set", overrides, "override as section.key=value (repeatable)");
        sub->add_option("-o,--out", out_dir, "output directory");
        sub->add_flag("-q,--quiet", quiet, "do not print the summary");
    }
    std::vector<std::string> argv_storage{"cmalab"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_storage) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << app.help();
        return 2;
    }
    const std::string subcommand = app.get_subcommands().front()->get_name();

    std::ostringstream sink;
    std::ostream& log = quiet ? static_cast<std::ostream&>(sink) : out;
    try {
        if (!config_path.empty() && !header_path.empty()) {
            throw ConfigurationError("--config and --config-from are mutually exclusive");
        }
        ConfigFile file = !config_path.empty()   ? ConfigFile::parse_file(config_path)
                          : !header_path.empty() ? ConfigFile::from_output_header(header_path)
                                                 : ConfigFile{};
        for (const std::string& o : overrides) {
            const auto dot = o.find('.');
            const auto eq = o.find('=');
            if (dot == std::string::npos || eq == std::string::npos || dot > eq) {
                throw ConfigurationError("--set " + o + ": expected section.key=value");
            }
            file.set(o.substr(0, dot), o.substr(dot + 1, eq - dot - 1), o.substr(eq + 1));
        }
        const RunConfig cfg = load_config(file, subcommand);

        std::filesystem::path dir = ".";
        if (!out_dir.empty()) {
            dir = out_dir;
        } else if (!cfg.output.empty()) {
            dir = cfg.output;
        } else if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') {
            dir = env;
        }
        const Output output(cfg, dir);
        const Context ctx{cfg, output, log};
        static const std::vector<std::pair<std::string, std::function<int(const Context&)>>> table = {
            {"solve", run_solve},           {"continuity", run_continuity}, {"sweep", run_sweep},
            {"magnify", run_magnify},       {"multiplier", run_multiplier}, {"verify", run_verify},
            {"slope", run_slope}};
        for (const auto& [name, fn] : table) {
            if (name == subcommand) return fn(ctx);
        }
        return 2;
    } catch (const ConfigurationError& e) {
        err << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const ConstraintViolation& e) {
        err << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const PreconditionError& e) {
        err << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace cmalab::cli
