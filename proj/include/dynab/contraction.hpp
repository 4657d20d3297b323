#pragma once

#include "dynab/discrete.hpp"
#include "dynab/expr.hpp"

namespace dynab {

// Candidate Finsler-Lyapunov function V(x, w) on tangent vectors, with
// homogeneity degree p.
struct FinslerLyapunovSpec {
    std::function<double(const Vec& x, const Vec& w)> V;
    int p = 2;
    bool quadratic = false;
    Mat P;  // when quadratic: V(x,w) = w' P w

    static FinslerLyapunovSpec quadratic_form(const Mat& P);
    static FinslerLyapunovSpec euclidean(int dim);  // V = |w|^2
};

struct FinslerReport {
    bool positivity = true;
    bool homogeneity = true;
    bool triangle = true;
    double worst_homogeneity = 0.0;  // worst |V(x,lw) - l^p V(x,w)| / scale
    double worst_triangle = 0.0;     // worst V(v+w)^{1/p} - V(v)^{1/p} - V(w)^{1/p}
    bool pass() const { return positivity && homogeneity && triangle; }
};

FinslerReport check_finsler_conditions(const FinslerLyapunovSpec& spec,
                                       const StateSpace& space, int n_samples,
                                       std::uint64_t seed, double tol = 1e-7);

// Radius bound rho(phi_t x1, phi_t x2) <= envelope(t, rho(x1,x2)).
struct ContractionCertificate {
    std::function<double(double s)> alpha;
    std::function<double(double t, double r)> envelope;
    long checked_points = 0;
    bool verdict = false;
    double worst_slack = 0.0;  // max of dV/dt + alpha(V) over samples
};

// Tests DV(x,w)(xi, Dxi w) <= -alpha(V(x,w)) on unit-|w| samples, with
// the derivative taken by central finite difference along the
// variational flow.  When alpha is linear, alpha(s) = c s, the envelope
// e^{-c t / p} r follows by the comparison argument; otherwise the
// envelope is the static r unless `user_envelope` is supplied.
ContractionCertificate check_contraction_inequality(
    const VectorFieldSpec& field, const StateSpace& space, const FlowConfig& cfg,
    const FinslerLyapunovSpec& spec, const std::function<double(double)>& alpha,
    int n_samples, std::uint64_t seed, double tol = 1e-6,
    std::function<double(double, double)> user_envelope = nullptr);

struct DiskCover {
    OrderedCover cover;
    std::vector<Vec> centers;
    std::vector<double> radii;
    MetricSpec metric;
};

// Grid of metric balls covering the space, ordered lexicographically by
// grid index; covering is verified by sampling.
DiskCover build_disk_cover(const StateSpace& space, const MetricSpec& metric, double radius,
                           int coverage_samples = 4096, std::uint64_t seed = 1);

// Phi(t,z): simulate the single center trajectory, then return every cell
// whose disk meets the contracted disk around it.  Refuses with
// NotContractive unless the certificate verdict holds.
std::vector<CellId> compute_phi_ex2(const DiskCover& disks, const VectorFieldSpec& field,
                                    const StateSpace& space, const FlowConfig& cfg,
                                    const ContractionCertificate& cert, double t, CellId z);

DiscreteSystem build_ex2_system(const DiskCover& disks, const VectorFieldSpec& field,
                                const StateSpace& space, const FlowConfig& cfg,
                                const ContractionCertificate& cert,
                                std::vector<double> time_grid);

}  // namespace dynab
