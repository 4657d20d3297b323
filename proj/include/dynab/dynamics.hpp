#pragma once

#include <functional>
#include <optional>
#include <string>

#include "dynab/geometry.hpp"

namespace dynab {

// Right-hand side of the ODE plus optional analytic Jacobian.  When the
// Jacobian is absent a central finite difference with step
// h_J = 1e-6 * (1 + |x|) is used.
struct VectorFieldSpec {
    int dim = 0;
    std::function<Vec(const Vec&)> rhs;
    std::function<Mat(const Vec&)> jacobian;  // optional
    std::string name;

    Mat jacobian_at(const Vec& x) const;

    // Builtin analytic systems, used as oracles throughout the tests.
    static VectorFieldSpec radial_contraction(int dim);       // xdot = -x
    static VectorFieldSpec rotation();                        // (y, -x)
    static VectorFieldSpec linear(const Mat& A);
    static VectorFieldSpec damped_pendulum(double damping);   // (y, -sin x - c y)
    static VectorFieldSpec gradient_circle();                 // thetadot = -sin theta
    static VectorFieldSpec by_name(const std::string& name, int dim);

    VectorFieldSpec reversed() const;
};

struct FlowConfig {
    double step = 1e-3;
    double t_max = 10.0;
};

// Classical fixed-step RK4; the final partial step is shortened to land
// exactly on t.  Negative t integrates the reversed field.  Torus
// coordinates are canonicalized every step; leaving a Box space raises
// Divergence (the forward-invariance assertion failed).
Vec flow(const VectorFieldSpec& spec, const StateSpace& space, const FlowConfig& cfg,
         double t, const Vec& x);

// exp(tA) * x via Eigen's scaling-and-squaring matrix exponential.
Vec linear_flow(const Mat& A, double t, const Vec& x);

// Joint state + linearized-perturbation integration: wdot = Dxi(x) w.
std::pair<Vec, Vec> variational_flow(const VectorFieldSpec& spec, const StateSpace& space,
                                     const FlowConfig& cfg, double t, const Vec& x,
                                     const Vec& w);

// Least t in [0, t_max] with g(flow(t,x)) = c: sign-change scan at
// integration steps, then bisection to 1e-9 * max(t_max, 1).
// nullopt means no crossing within t_max.
std::optional<double> first_crossing_time(const VectorFieldSpec& spec,
                                          const StateSpace& space, const FlowConfig& cfg,
                                          const Vec& x,
                                          const std::function<double(const Vec&)>& g,
                                          double c, double t_max);

}  // namespace dynab
