#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmalab/radial_geometry.hpp"
#include "cmalab/singular_rhs.hpp"

namespace cmalab {

struct SequenceEntry {
    std::vector<double> phi;
    double tau;
    RhsFamily rhs;
};

struct PotentialSequence {
    KahlerModel model;
    std::vector<SequenceEntry> entries;
};

struct CrucialIntegral {
    double log_value = 0.0;
    double value = 0.0;  // exp(log_value), +inf on overflow
};

// n * int e^{-tau (phi - avg phi)} F (psi')^(n-1) psi'' ds, accumulated in log space.
CrucialIntegral crucial_integral(std::span<const double> phi, double tau, const RhsFamily& rhs,
                                 const KahlerModel& model);

struct GermOptions {
    double upper = 0.0;          // integrate over [start, upper]
    // Where the pole region is taken to begin; s_min when absent. Left of it phi
    // is replaced by its secant continuation.
    std::optional<double> anchor;
    double slope_window = 2.0;   // left secant window for the pole slope
    int extensions = 2;          // nested domains s_min - j*extension_length
    double extension_length = 10.0;
    double growth_factor = 5.0;
    double borderline = 1e-9;
};

struct GermIntegral {
    bool divergent = false;
    double left_slope = 0.0;      // estimated slope of phi at the pole
    double tail_exponent = 0.0;   // k + n - tau * slope
    std::vector<double> log_values;  // one per nested domain, j = 0..extensions
    double max_growth = 1.0;      // largest ratio between consecutive domains
};

// Integral of |z|^{2k} e^{-tau (phi - avg phi)} near the pole in reduced form.
// phi is continued linearly to the left of s_min with its estimated slope.
GermIntegral germ_integral(int k, std::span<const double> phi, double tau, const KahlerModel& model,
                           const GermOptions& options = {});

struct StalkDescriptor {
    int k_min = 0;
    bool nontrivial = false;
    bool equals_maximal_ideal = false;
    double tau_nu_product = 0.0;
    bool germ_check_consistent = true;  // germ integrals agree with the threshold at k_min
};

// Smallest vanishing order k with k + n > tau*nu, borderline counted as divergent.
int minimal_vanishing_order(double tau_nu, int n, double borderline = 1e-9);

StalkDescriptor stalk_from_sequence(const PotentialSequence& seq);

struct TrivialLemmaReport {
    bool nontrivial = false;
    bool curvature_bound = false;
    bool maximal_ideal_excluded = false;
    bool all_checkable_pass = false;
    bool conclusion_claimed = false;  // always false: the conclusion is not numerical
    std::vector<std::string> notes;
};

TrivialLemmaReport trivial_lemma_report(const StalkDescriptor& stalk, double curvature_margin);

}  // namespace cmalab
