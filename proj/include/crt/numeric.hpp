#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace crt {

// Kahan-style compensated accumulator. Accumulations over clusters can reach
// millions of terms in simulation, so every sum in the library goes through
// this instead of a bare double.
class KahanSum {
  public:
    void add(double x) {
        const double y = x - comp_;
        const double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    KahanSum& operator+=(double x) {
        add(x);
        return *this;
    }
    double value() const { return sum_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Running count + compensated sums of v and v^2 for one group of clusters.
struct MomentAccum {
    long count = 0;
    KahanSum sum;
    KahanSum sum_sq;

    void add(double v) {
        ++count;
        sum.add(v);
        sum_sq.add(v * v);
    }
    double mean() const { return sum.value() / static_cast<double>(count); }
    double mean_sq() const { return sum_sq.value() / static_cast<double>(count); }
};

struct QuadratureRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

// Gauss-Legendre nodes/weights via Newton iteration on the Legendre recurrence.
inline QuadratureRule gauss_legendre(std::size_t n) {
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double pi = 3.14159265358979323846;
    for (std::size_t k = 0; k < (n + 1) / 2; ++k) {
        double x = std::cos(pi * (static_cast<double>(k) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (std::size_t j = 2; j <= n; ++j) {
                const double jj = static_cast<double>(j);
                const double p2 = ((2.0 * jj - 1.0) * x * p1 - (jj - 1.0) * p0) / jj;
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        rule.nodes[k] = -x;
        rule.nodes[n - 1 - k] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.weights[k] = w;
        rule.weights[n - 1 - k] = w;
    }
    return rule;
}

// Integrate f over [a, b] with an n-node Gauss-Legendre rule.
template <typename F>
double integrate(F&& f, double a, double b, std::size_t n) {
    const QuadratureRule rule = gauss_legendre(n);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    KahanSum acc;
    for (std::size_t k = 0; k < n; ++k) {
        acc.add(rule.weights[k] * f(mid + half * rule.nodes[k]));
    }
    return half * acc.value();
}

}  // namespace crt
