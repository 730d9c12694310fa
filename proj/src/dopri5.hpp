#pragma once

// Dormand-Prince 5(4) stepper with preallocated stages.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace beb::detail {

template <class Field>
class Dopri5 {
public:
    Dopri5(Field f, std::size_t n) : f_(std::move(f)), n_(n), tmp_(n)
    {
        for (auto& k : k_) {
            k.assign(n, 0.0);
        }
    }

    /// Fifth-order step of size h from x into out. Returns the RMS error
    /// estimate scaled by atol + rtol max(|x_i|, |out_i|).
    double step(const std::vector<double>& x, double h, std::vector<double>& out, double atol, double rtol)
    {
        stages(x, h, out);
        f_(out.data(), k_[6].data());
        double sum = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double e = h * (e1 * k_[0][i] + e3 * k_[2][i] + e4 * k_[3][i] + e5 * k_[4][i] + e6 * k_[5][i] +
                                  e7 * k_[6][i]);
            const double sc = atol + rtol * std::max(std::abs(x[i]), std::abs(out[i]));
            sum += (e / sc) * (e / sc);
        }
        return n_ == 0 ? 0.0 : std::sqrt(sum / static_cast<double>(n_));
    }

    /// Step without error estimate.
    void advance(const std::vector<double>& x, double h, std::vector<double>& out) { stages(x, h, out); }

private:
    void stages(const std::vector<double>& x, double h, std::vector<double>& out)
    {
        out.resize(n_);
        f_(x.data(), k_[0].data());
        combine(x, h, {a21}, 1);
        f_(tmp_.data(), k_[1].data());
        combine(x, h, {a31, a32}, 2);
        f_(tmp_.data(), k_[2].data());
        combine(x, h, {a41, a42, a43}, 3);
        f_(tmp_.data(), k_[3].data());
        combine(x, h, {a51, a52, a53, a54}, 4);
        f_(tmp_.data(), k_[4].data());
        combine(x, h, {a61, a62, a63, a64, a65}, 5);
        f_(tmp_.data(), k_[5].data());
        for (std::size_t i = 0; i < n_; ++i) {
            out[i] = x[i] + h * (b1 * k_[0][i] + b3 * k_[2][i] + b4 * k_[3][i] + b5 * k_[4][i] + b6 * k_[5][i]);
        }
    }

    void combine(const std::vector<double>& x, double h, std::array<double, 5> a, std::size_t m)
    {
        for (std::size_t i = 0; i < n_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                s += a[j] * k_[j][i];
            }
            tmp_[i] = x[i] + h * s;
        }
    }

    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                            a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                            a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
    static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                            b6 = 11.0 / 84.0;
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                            e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

    Field f_;
    std::size_t n_;
    std::array<std::vector<double>, 7> k_;
    std::vector<double> tmp_;
};

} // namespace beb::detail
