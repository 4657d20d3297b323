#pragma once

#include <map>

#include "dynab/discrete.hpp"

namespace dynab {

// User-declared singular element: hyperbolic equilibrium or periodic
// orbit.  Hyperbolicity itself is an assertion, recorded, not verified.
struct SingularElement {
    enum class Kind { Equilibrium, PeriodicOrbit };
    enum class Stability { Attracting, Repelling, Saddle };

    int id = 0;
    Kind kind = Kind::Equilibrium;
    Vec point;              // equilibrium position / orbit seed
    double period = 0.0;    // PeriodicOrbit only
    Stability stability = Stability::Attracting;
    double capture_radius = 0.0;  // 0 selects 0.05 * space diameter

    std::vector<Vec> orbit_points;  // filled by validate_elements (64 samples)
};

// Checks |xi(point)| <= tol_eq for equilibria and the return condition
// for orbits; fills orbit tube samples and default capture radii.
void validate_elements(const VectorFieldSpec& field, const StateSpace& space,
                       const FlowConfig& cfg, std::vector<SingularElement>& elements,
                       double tol_eq = 1e-6, double tol_orbit = 1e-4);

constexpr int kUnresolved = -1;

struct ClassifyOptions {
    double t_max = 50.0;
    double dwell_constant = 0.5;  // equilibria dwell 2x this; orbits 2x period
};

// First element whose capture set holds the forward trajectory for the
// dwell time; kUnresolved if t_max runs out.
int classify_omega_limit(const VectorFieldSpec& field, const StateSpace& space,
                         const FlowConfig& cfg, const Vec& x,
                         const std::vector<SingularElement>& elements,
                         const ClassifyOptions& opt = {});

// Same on the reversed field.
int classify_alpha_limit(const VectorFieldSpec& field, const StateSpace& space,
                         const FlowConfig& cfg, const Vec& x,
                         const std::vector<SingularElement>& elements,
                         const ClassifyOptions& opt = {});

// Partial order beta_i > beta_j, witnessed by sampled (alpha, omega)
// pairs; reflexive pairs carry the element's own point.
struct ConnectionOrder {
    std::vector<std::pair<int, int>> pairs;                       // sorted
    std::map<std::pair<int, int>, std::vector<Vec>> representatives;
    double unresolved_fraction = 0.0;
};

struct OrderOptions {
    ClassifyOptions classify;
    double unresolved_threshold = 0.01;
    int max_representatives = 32;
};

ConnectionOrder build_partial_order(const VectorFieldSpec& field, const StateSpace& space,
                                    const FlowConfig& cfg,
                                    const std::vector<SingularElement>& elements,
                                    int n_samples, std::uint64_t seed,
                                    const OrderOptions& opt = {});

// Z = witnessed pairs, Phi(t,z) = {z}; complete by cell invariance, so
// tagged as an over-approximation.
DiscreteSystem build_ms_system(const ConnectionOrder& order, std::vector<double> time_grid);

// Connection cells as predicate regions (membership by classification),
// in the same order as `order.pairs`.
OrderedCover cells_as_cover(const ConnectionOrder& order, const VectorFieldSpec& field,
                            const StateSpace& space, const FlowConfig& cfg,
                            const std::vector<SingularElement>& elements,
                            const ClassifyOptions& opt = {});

}  // namespace dynab
