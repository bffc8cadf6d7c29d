#ifndef EXPRESSLANE_LATENCY_HPP
#define EXPRESSLANE_LATENCY_HPP

#include <string_view>
#include <vector>

namespace expresslane {

enum class LatencyForm { Monomial, Bpr, Polynomial };

std::string_view to_string(LatencyForm form);

/// Link delay function of a single lane.
///
/// Monomial: a + b x^p. BPR: a + b (x/c)^p. Polynomial: sum_i k_i x^i.
/// Evaluation is closed-form for all three, including the antiderivative.
class LatencyFn {
public:
    static LatencyFn monomial(double b, double p, double a = 0.0);
    static LatencyFn bpr(double a, double b, double c, double p);
    static LatencyFn polynomial(std::vector<double> coefficients);

    double eval(double x) const;
    double prime(double x) const;
    double second(double x) const;
    double third(double x) const;
    /// Integral of the latency from 0 to x.
    double integral(double x) const;

    /// True when the third derivative is positive for all x > 0.
    bool third_derivative_positive() const;

    LatencyForm form() const noexcept { return form_; }
    double free_flow() const noexcept { return a_; }
    double scale() const noexcept { return b_; }
    double capacity() const noexcept { return c_; }
    double exponent() const noexcept { return p_; }
    const std::vector<double>& coefficients() const noexcept { return coef_; }

    bool operator==(const LatencyFn& other) const = default;

private:
    LatencyFn() = default;

    LatencyForm form_ = LatencyForm::Monomial;
    double a_ = 0.0;
    double b_ = 1.0;
    double c_ = 1.0;
    double p_ = 2.0;
    std::vector<double> coef_;
};

inline double latency_eval(const LatencyFn& fn, double x) { return fn.eval(x); }
inline double latency_prime(const LatencyFn& fn, double x) { return fn.prime(x); }
inline double latency_integral(const LatencyFn& fn, double x) { return fn.integral(x); }

}  // namespace expresslane

#endif
