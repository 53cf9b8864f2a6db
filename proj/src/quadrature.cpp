#include "tailcast/quadrature.hpp"

#include <cmath>
#include <queue>
#include <string>
#include <vector>

#include "tailcast/error.hpp"

namespace tailcast {

namespace {

// Kronrod abscissae on [0, 1]; odd indices are the 7-point Gauss nodes.
constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a;
    double b;
    double value;
    double error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gauss_kronrod(const std::function<double(double)>& f, double a, double b)
{
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const double sum = f(c - dx) + f(c + dx);
        kronrod += kWgk[j] * sum;
        if (j % 2 == 1)
            gauss += kWg[j / 2] * sum;
    }
    kronrod *= h;
    gauss *= h;
    return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace

void QuadratureSpec::validate() const
{
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
        throw Error(ErrorCode::domain, "quadrature tolerances must be positive");
    if (!(half_width >= 8.0))
        throw Error(ErrorCode::domain, "quadrature half_width must be >= 8");
    if (max_subdivisions < 1)
        throw Error(ErrorCode::domain, "quadrature max_subdivisions must be >= 1");
}

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureSpec& spec)
{
    spec.validate();
    if (!std::isfinite(a) || !std::isfinite(b))
        throw Error(ErrorCode::domain, "integration limits must be finite");
    if (a == b)
        return {0.0, 0.0, 0};
    if (a > b) {
        auto r = integrate(f, b, a, spec);
        r.value = -r.value;
        return r;
    }

    std::priority_queue<Segment> heap;
    heap.push(gauss_kronrod(f, a, b));
    double value = heap.top().value;
    double error = heap.top().error;
    int intervals = 1;

    while (error > std::max(spec.abs_tol, spec.rel_tol * std::abs(value))) {
        if (intervals >= spec.max_subdivisions)
            throw QuadratureError("integrate: subdivision limit " + std::to_string(spec.max_subdivisions) +
                                      " reached, estimate " + std::to_string(value) + " +/- " +
                                      std::to_string(error),
                                  value, error);
        const Segment worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b))
            throw QuadratureError("integrate: interval cannot be bisected further", value, error);
        heap.pop();
        const Segment left = gauss_kronrod(f, worst.a, mid);
        const Segment right = gauss_kronrod(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++intervals;
        if (!std::isfinite(value))
            throw QuadratureError("integrate: integrand is not finite", value, error);
    }

    // Re-sum to shed the drift of the running updates.
    value = 0.0;
    error = 0.0;
    for (; !heap.empty(); heap.pop()) {
        value += heap.top().value;
        error += heap.top().error;
    }
    return {value, error, intervals};
}

}  // namespace tailcast
