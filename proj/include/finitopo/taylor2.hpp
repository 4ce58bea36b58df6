#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace finitopo {

/// Second-order forward-mode number: value, gradient and Hessian with respect
/// to up to kMaxVars independent variables. Only the leading `dim` entries are
/// meaningful; the rest stay zero.
class Taylor2 {
public:
    static constexpr std::size_t kMaxVars = 4;

    Taylor2() = default;
    explicit Taylor2(double value) : value_(value) {}

    /// The independent variable number `index` taking `value`.
    static Taylor2 variable(double value, std::size_t index) {
        Taylor2 t(value);
        t.grad_[index] = 1.0;
        return t;
    }

    double value() const { return value_; }
    double grad(std::size_t i) const { return grad_[i]; }
    double hess(std::size_t i, std::size_t j) const { return hess_[i][j]; }

    Taylor2& operator+=(const Taylor2& o) {
        value_ += o.value_;
        for (std::size_t i = 0; i < kMaxVars; ++i) {
            grad_[i] += o.grad_[i];
            for (std::size_t j = 0; j < kMaxVars; ++j) hess_[i][j] += o.hess_[i][j];
        }
        return *this;
    }
    Taylor2& operator-=(const Taylor2& o) {
        value_ -= o.value_;
        for (std::size_t i = 0; i < kMaxVars; ++i) {
            grad_[i] -= o.grad_[i];
            for (std::size_t j = 0; j < kMaxVars; ++j) hess_[i][j] -= o.hess_[i][j];
        }
        return *this;
    }
    Taylor2& operator*=(const Taylor2& o) {
        Taylor2 r(value_ * o.value_);
        for (std::size_t i = 0; i < kMaxVars; ++i) {
            r.grad_[i] = grad_[i] * o.value_ + value_ * o.grad_[i];
            for (std::size_t j = 0; j < kMaxVars; ++j) {
                r.hess_[i][j] = hess_[i][j] * o.value_ + value_ * o.hess_[i][j] +
                                grad_[i] * o.grad_[j] + grad_[j] * o.grad_[i];
            }
        }
        return *this = r;
    }
    Taylor2& operator/=(const Taylor2& o) { return *this *= o.reciprocal(); }

    Taylor2 operator-() const { return chain(-value_, -1.0, 0.0); }

    /// Applies a scalar function with value f, first derivative df and second
    /// derivative d2f evaluated at value().
    Taylor2 chain(double f, double df, double d2f) const {
        Taylor2 r(f);
        for (std::size_t i = 0; i < kMaxVars; ++i) {
            r.grad_[i] = df * grad_[i];
            for (std::size_t j = 0; j < kMaxVars; ++j)
                r.hess_[i][j] = df * hess_[i][j] + d2f * grad_[i] * grad_[j];
        }
        return r;
    }

    Taylor2 reciprocal() const {
        const double inv = 1.0 / value_;
        return chain(inv, -inv * inv, 2.0 * inv * inv * inv);
    }

private:
    double value_ = 0.0;
    std::array<double, kMaxVars> grad_{};
    std::array<std::array<double, kMaxVars>, kMaxVars> hess_{};
};

inline Taylor2 operator+(Taylor2 a, const Taylor2& b) { return a += b; }
inline Taylor2 operator-(Taylor2 a, const Taylor2& b) { return a -= b; }
inline Taylor2 operator*(Taylor2 a, const Taylor2& b) { return a *= b; }
inline Taylor2 operator/(Taylor2 a, const Taylor2& b) { return a /= b; }

inline Taylor2 sin(const Taylor2& a) {
    const double s = std::sin(a.value()), c = std::cos(a.value());
    return a.chain(s, c, -s);
}
inline Taylor2 cos(const Taylor2& a) {
    const double s = std::sin(a.value()), c = std::cos(a.value());
    return a.chain(c, -s, -c);
}
inline Taylor2 tan(const Taylor2& a) {
    const double t = std::tan(a.value());
    const double sec2 = 1.0 + t * t;
    return a.chain(t, sec2, 2.0 * t * sec2);
}
inline Taylor2 exp(const Taylor2& a) {
    const double e = std::exp(a.value());
    return a.chain(e, e, e);
}
inline Taylor2 log(const Taylor2& a) {
    const double x = a.value();
    return a.chain(std::log(x), 1.0 / x, -1.0 / (x * x));
}
inline Taylor2 sqrt(const Taylor2& a) {
    const double s = std::sqrt(a.value());
    return a.chain(s, 0.5 / s, -0.25 / (s * a.value()));
}
inline Taylor2 sinh(const Taylor2& a) {
    const double s = std::sinh(a.value()), c = std::cosh(a.value());
    return a.chain(s, c, s);
}
inline Taylor2 cosh(const Taylor2& a) {
    const double s = std::sinh(a.value()), c = std::cosh(a.value());
    return a.chain(c, s, c);
}
inline Taylor2 tanh(const Taylor2& a) {
    const double t = std::tanh(a.value());
    const double d = 1.0 - t * t;
    return a.chain(t, d, -2.0 * t * d);
}
inline Taylor2 atan(const Taylor2& a) {
    const double x = a.value();
    const double d = 1.0 / (1.0 + x * x);
    return a.chain(std::atan(x), d, -2.0 * x * d * d);
}

/// a^p for a constant exponent. Integer exponents are valid for negative a.
inline Taylor2 pow(const Taylor2& a, double p) {
    const double x = a.value();
    if (p == 0.0) return Taylor2(1.0);
    if (p == 1.0) return a;
    const double f = std::pow(x, p);
    const double df = p * std::pow(x, p - 1.0);
    const double d2f = p * (p - 1.0) * std::pow(x, p - 2.0);
    return a.chain(f, df, d2f);
}

}  // namespace finitopo
