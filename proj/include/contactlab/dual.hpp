#pragma once

// Single-direction forward-mode dual numbers. Nesting Dual<Dual<double>>
// yields mixed second derivatives, which is how Hessians are assembled.

#include <cmath>
#include <type_traits>

namespace contactlab {

template <typename T>
struct Dual
{
    using scalar_type = T;

    T v{};
    T d{};

    constexpr Dual() = default;
    constexpr Dual(T value) : v(value), d(0) {}
    constexpr Dual(T value, T tangent) : v(value), d(tangent) {}

    // Allows Dual<Dual<double>>(1.5) by forwarding the double inward.
    template <typename S>
        requires(std::is_arithmetic_v<S> && !std::is_same_v<S, T>)
    constexpr Dual(S value) : v(T(value)), d(T(0))
    {}
};

template <typename T>
inline constexpr bool is_dual_v = false;
template <typename T>
inline constexpr bool is_dual_v<Dual<T>> = true;

/// Innermost real value of a (possibly nested) dual.
inline double primal(double x) { return x; }
template <typename T>
double primal(const Dual<T>& x)
{
    return primal(x.v);
}

template <typename T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b)
{
    return {a.v + b.v, a.d + b.d};
}
template <typename T>
Dual<T> operator-(const Dual<T>& a, const Dual<T>& b)
{
    return {a.v - b.v, a.d - b.d};
}
template <typename T>
Dual<T> operator-(const Dual<T>& a)
{
    return {-a.v, -a.d};
}
template <typename T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b)
{
    return {a.v * b.v, a.d * b.v + a.v * b.d};
}
template <typename T>
Dual<T> operator/(const Dual<T>& a, const Dual<T>& b)
{
    T inv = T(1) / b.v;
    T q = a.v * inv;
    return {q, (a.d - q * b.d) * inv};
}

template <typename T>
Dual<T> exp(const Dual<T>& a)
{
    using std::exp;
    T e = exp(a.v);
    return {e, e * a.d};
}
template <typename T>
Dual<T> log(const Dual<T>& a)
{
    using std::log;
    return {log(a.v), a.d / a.v};
}
template <typename T>
Dual<T> sin(const Dual<T>& a)
{
    using std::cos;
    using std::sin;
    return {sin(a.v), cos(a.v) * a.d};
}
template <typename T>
Dual<T> cos(const Dual<T>& a)
{
    using std::cos;
    using std::sin;
    return {cos(a.v), -(sin(a.v) * a.d)};
}
template <typename T>
Dual<T> sqrt(const Dual<T>& a)
{
    using std::sqrt;
    T s = sqrt(a.v);
    return {s, a.d / (T(2) * s)};
}
template <typename T>
Dual<T> tanh(const Dual<T>& a)
{
    using std::tanh;
    T t = tanh(a.v);
    return {t, (T(1) - t * t) * a.d};
}
template <typename T>
Dual<T> pow(const Dual<T>& a, double e)
{
    using std::pow;
    if (e == 0.0)
        return {T(1), T(0)};
    return {pow(a.v, e), T(e) * pow(a.v, e - 1.0) * a.d};
}

} // namespace contactlab
