#pragma once

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

namespace fluxent {

// Integer-order Bessel functions J_n(x) for all |n| <= n_max at a single
// argument, by Miller's backward recurrence normalised with
// J_0 + 2*sum J_2k = 1.
class BesselTable {
public:
    BesselTable() = default;

    BesselTable(double x, int n_max) : x_(x), n_max_(n_max) {
        if (n_max < 0) throw std::invalid_argument("BesselTable: n_max < 0");
        if (!std::isfinite(x)) throw std::invalid_argument("BesselTable: non-finite argument");
        values_.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
        const double ax = std::fabs(x);
        if (ax == 0.0) {
            values_[0] = 1.0;
            return;
        }
        fill_positive(ax);
        if (x < 0.0)
            for (int n = 1; n <= n_max_; n += 2) values_[n] = -values_[n];
    }

    double x() const { return x_; }
    int n_max() const { return n_max_; }

    // J_n(x); orders beyond the table are treated as zero.
    double operator()(int n) const {
        const int m = std::abs(n);
        if (m > n_max_) return 0.0;
        const double v = values_[m];
        return (n < 0 && (m & 1)) ? -v : v;
    }

private:
    void fill_positive(double ax) {
        const int top = std::max(n_max_, static_cast<int>(std::ceil(ax)));
        int start = top + 20 + static_cast<int>(std::ceil(std::sqrt(60.0 * (top + 1))));
        if (start & 1) ++start;

        constexpr double big = 1e250;
        constexpr double small = 1e-250;
        double jp = 0.0;  // J_{k+1}
        double j = 1e-300;  // J_k
        double norm = 0.0;
        const double two_over_x = 2.0 / ax;
        for (int k = start; k > 0; --k) {
            const double jm = k * two_over_x * j - jp;  // J_{k-1}
            jp = j;
            j = jm;
            if (std::fabs(j) > big) {
                j *= small;
                jp *= small;
                norm *= small;
                for (int n = k; n <= n_max_; ++n) values_[n] *= small;
            }
            const int n = k - 1;
            if (n <= n_max_) values_[n] = j;
            if (n > 0 && (n % 2 == 0)) norm += 2.0 * j;
        }
        norm += j;
        for (double& v : values_) v /= norm;
    }

    double x_{0.0};
    int n_max_{0};
    std::vector<double> values_{1.0};
};

inline double bessel_j(int n, double x) {
    return BesselTable(x, std::abs(n))(n);
}

}  // namespace fluxent
