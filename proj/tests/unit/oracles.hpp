#pragma once

// Independent reference computations used only by the tests. None of these
// call into the library's numerical code.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracle {

inline double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }
inline double Phi(double x) { return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0))); }

// Composite Simpson with an even panel count.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels = 20000)
{
    if (panels % 2)
        ++panels;
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int i = 1; i < panels; ++i)
        s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// Tie-corrected Mann-Whitney concordance by brute force over all pairs.
inline double mann_whitney(const std::vector<double>& p, const std::vector<int>& x)
{
    double num = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!x[i])
            continue;
        for (std::size_t j = 0; j < p.size(); ++j) {
            if (x[j])
                continue;
            ++pairs;
            num += p[i] > p[j] ? 1.0 : (p[i] == p[j] ? 0.5 : 0.0);
        }
    }
    return num / static_cast<double>(pairs);
}

// Dense Gaussian elimination with partial pivoting; solves A x = b.
inline std::vector<double> solve(std::vector<std::vector<double>> A, std::vector<double> b)
{
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(A[r][c]) > std::abs(A[piv][c]))
                piv = r;
        std::swap(A[c], A[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = A[r][c] / A[c][c];
            for (std::size_t k = c; k < n; ++k)
                A[r][k] -= f * A[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k)
            s -= A[i][k] * x[k];
        x[i] = s / A[i][i];
    }
    return x;
}

}  // namespace oracle
