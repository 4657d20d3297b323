#include "dynab/dynamics.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace dynab {

Mat VectorFieldSpec::jacobian_at(const Vec& x) const {
    if (jacobian) return jacobian(x);
    double h = 1e-6 * (1.0 + x.norm());
    Mat J(dim, dim);
    for (int j = 0; j < dim; ++j) {
        Vec xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        J.col(j) = (rhs(xp) - rhs(xm)) / (2.0 * h);
    }
    return J;
}

VectorFieldSpec VectorFieldSpec::radial_contraction(int dim) {
    VectorFieldSpec s;
    s.dim = dim;
    s.rhs = [](const Vec& x) { return Vec(-x); };
    s.jacobian = [dim](const Vec&) { return Mat(-Mat::Identity(dim, dim)); };
    s.name = "radial_contraction";
    return s;
}

VectorFieldSpec VectorFieldSpec::rotation() {
    VectorFieldSpec s;
    s.dim = 2;
    s.rhs = [](const Vec& x) {
        Vec v(2);
        v << x[1], -x[0];
        return v;
    };
    s.jacobian = [](const Vec&) {
        Mat J(2, 2);
        J << 0, 1, -1, 0;
        return J;
    };
    s.name = "rotation";
    return s;
}

VectorFieldSpec VectorFieldSpec::linear(const Mat& A) {
    VectorFieldSpec s;
    s.dim = static_cast<int>(A.rows());
    s.rhs = [A](const Vec& x) { return Vec(A * x); };
    s.jacobian = [A](const Vec&) { return A; };
    s.name = "linear";
    return s;
}

VectorFieldSpec VectorFieldSpec::damped_pendulum(double damping) {
    VectorFieldSpec s;
    s.dim = 2;
    s.rhs = [damping](const Vec& x) {
        Vec v(2);
        v << x[1], -std::sin(x[0]) - damping * x[1];
        return v;
    };
    s.jacobian = [damping](const Vec& x) {
        Mat J(2, 2);
        J << 0, 1, -std::cos(x[0]), -damping;
        return J;
    };
    s.name = "damped_pendulum";
    return s;
}

VectorFieldSpec VectorFieldSpec::gradient_circle() {
    VectorFieldSpec s;
    s.dim = 1;
    s.rhs = [](const Vec& x) {
        Vec v(1);
        v << -std::sin(x[0]);
        return v;
    };
    s.jacobian = [](const Vec& x) {
        Mat J(1, 1);
        J << -std::cos(x[0]);
        return J;
    };
    s.name = "gradient_circle";
    return s;
}

VectorFieldSpec VectorFieldSpec::by_name(const std::string& name, int dim) {
    if (name == "radial_contraction") return radial_contraction(dim);
    if (name == "rotation") return rotation();
    if (name == "damped_pendulum") return damped_pendulum(0.5);
    if (name == "gradient_circle") return gradient_circle();
    throw ConfigError("unknown builtin system '" + name + "'");
}

VectorFieldSpec VectorFieldSpec::reversed() const {
    VectorFieldSpec s;
    s.dim = dim;
    auto f = rhs;
    s.rhs = [f](const Vec& x) { return Vec(-f(x)); };
    if (jacobian) {
        auto J = jacobian;
        s.jacobian = [J](const Vec& x) { return Mat(-J(x)); };
    }
    s.name = name + "_reversed";
    return s;
}

namespace {

Vec rk4_step(const std::function<Vec(const Vec&)>& f, const Vec& x, double h) {
    Vec k1 = f(x);
    Vec k2 = f(x + 0.5 * h * k1);
    Vec k3 = f(x + 0.5 * h * k2);
    Vec k4 = f(x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void enforce_space(const StateSpace& space, Vec& x) {
    x = space.canonicalize(x);
    if (space.kind() == StateSpace::Kind::Box) {
        double tol = 1e-9 * (1.0 + x.norm());
        if (!space.contains(x, tol))
            throw Divergence("trajectory left the box state space (invariance violated)");
        // Clamp rounding-level excursions so boundary starts stay inside.
        for (int i = 0; i < space.dim(); ++i)
            x[i] = std::min(std::max(x[i], space.lower(i)), space.upper(i));
    }
}

template <typename Step>
Vec integrate(double t, Vec x, double step, const StateSpace& space, Step&& do_step) {
    double remaining = t;
    while (remaining > 0) {
        double h = std::min(step, remaining);
        x = do_step(x, h);
        enforce_space(space, x);
        remaining -= h;
    }
    return x;
}

}  // namespace

Vec flow(const VectorFieldSpec& spec, const StateSpace& space, const FlowConfig& cfg,
         double t, const Vec& x) {
    const VectorFieldSpec* field = &spec;
    VectorFieldSpec rev;
    double tt = t;
    if (t < 0) {
        rev = spec.reversed();
        field = &rev;
        tt = -t;
    }
    Vec x0 = space.canonicalize(x);
    auto& f = field->rhs;
    return integrate(tt, x0, cfg.step, space,
                     [&](const Vec& y, double h) { return rk4_step(f, y, h); });
}

Vec linear_flow(const Mat& A, double t, const Vec& x) {
    if (t == 0.0) return x;
    Mat E = (t * A).exp();
    return E * x;
}

std::pair<Vec, Vec> variational_flow(const VectorFieldSpec& spec, const StateSpace& space,
                                     const FlowConfig& cfg, double t, const Vec& x,
                                     const Vec& w) {
    const VectorFieldSpec* field = &spec;
    VectorFieldSpec rev;
    double tt = t;
    if (t < 0) {
        rev = spec.reversed();
        field = &rev;
        tt = -t;
    }
    int dim = spec.dim;
    // Joint RK4 on (x, w).
    auto f = [&](const Vec& s) {
        Vec xs = s.head(dim), ws = s.tail(dim);
        Vec out(2 * dim);
        out.head(dim) = field->rhs(xs);
        out.tail(dim) = field->jacobian_at(xs) * ws;
        return out;
    };
    Vec s0(2 * dim);
    s0.head(dim) = space.canonicalize(x);
    s0.tail(dim) = w;
    double remaining = tt;
    while (remaining > 0) {
        double h = std::min(cfg.step, remaining);
        s0 = rk4_step(f, s0, h);
        Vec xs = s0.head(dim);
        enforce_space(space, xs);
        s0.head(dim) = xs;
        remaining -= h;
    }
    return {Vec(s0.head(dim)), Vec(s0.tail(dim))};
}

std::optional<double> first_crossing_time(const VectorFieldSpec& spec,
                                          const StateSpace& space, const FlowConfig& cfg,
                                          const Vec& x,
                                          const std::function<double(const Vec&)>& g,
                                          double c, double t_max) {
    Vec cur = space.canonicalize(x);
    double s0 = g(cur) - c;
    if (s0 == 0.0) return 0.0;
    double tol = 1e-9 * std::max(t_max, 1.0);
    double t = 0.0;
    auto& f = spec.rhs;
    while (t < t_max) {
        double h = std::min(cfg.step, t_max - t);
        Vec next = rk4_step(f, cur, h);
        enforce_space(space, next);
        double s1 = g(next) - c;
        if (s0 * s1 <= 0.0) {
            // Bisect the step on the substep flow from `cur`.
            double lo = 0.0, hi = h;
            while (hi - lo > tol) {
                double mid = 0.5 * (lo + hi);
                Vec xm = rk4_step(f, cur, mid);
                xm = space.canonicalize(xm);
                double sm = g(xm) - c;
                if (s0 * sm <= 0.0) hi = mid;
                else lo = mid;
            }
            return t + 0.5 * (lo + hi);
        }
        cur = next;
        s0 = s1;
        t += h;
    }
    return std::nullopt;
}

}  // namespace dynab
