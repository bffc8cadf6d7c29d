#include "expresslane/latency.hpp"

#include <cmath>
#include <string>

#include "expresslane/errors.hpp"

namespace expresslane {

std::string_view to_string(LatencyForm form)
{
    switch (form) {
    case LatencyForm::Monomial: return "monomial";
    case LatencyForm::Bpr: return "bpr";
    case LatencyForm::Polynomial: return "polynomial";
    }
    return "unknown";
}

namespace {

void require(bool ok, const std::string& what)
{
    if (!ok)
        throw Error(ErrorCode::InvalidLatency, what);
}

void check_flow(double x)
{
    if (std::isnan(x) || x < 0.0)
        throw Error(ErrorCode::NegativeFlow, "latency evaluated at x = " + std::to_string(x));
}

// x^q with x^0 == 1 and q < 0 treated as a vanishing term.
double powi(double x, double q)
{
    if (q == 0.0)
        return 1.0;
    if (x == 0.0)
        return 0.0;
    return std::pow(x, q);
}

}  // namespace

LatencyFn LatencyFn::monomial(double b, double p, double a)
{
    LatencyFn fn = bpr(a, b, 1.0, p);
    fn.form_ = LatencyForm::Monomial;
    return fn;
}

LatencyFn LatencyFn::bpr(double a, double b, double c, double p)
{
    require(std::isfinite(a) && a >= 0.0, "free-flow time a must be >= 0");
    require(std::isfinite(b) && b > 0.0, "scale b must be > 0");
    require(std::isfinite(c) && c > 0.0, "capacity c must be > 0");
    require(std::isfinite(p) && p >= 2.0, "exponent p must be >= 2");
    LatencyFn fn;
    fn.form_ = LatencyForm::Bpr;
    fn.a_ = a;
    fn.b_ = b;
    fn.c_ = c;
    fn.p_ = p;
    return fn;
}

LatencyFn LatencyFn::polynomial(std::vector<double> coefficients)
{
    require(!coefficients.empty(), "polynomial needs at least one coefficient");
    for (double k : coefficients)
        require(std::isfinite(k) && k >= 0.0, "polynomial coefficients must be finite and >= 0");
    LatencyFn fn;
    fn.form_ = LatencyForm::Polynomial;
    fn.a_ = coefficients.front();
    fn.coef_ = std::move(coefficients);
    return fn;
}

double LatencyFn::eval(double x) const
{
    check_flow(x);
    if (form_ == LatencyForm::Polynomial) {
        double acc = 0.0;
        for (auto i = coef_.size(); i-- > 0;)
            acc = acc * x + coef_[i];
        return acc;
    }
    return a_ + b_ * powi(x / c_, p_);
}

double LatencyFn::prime(double x) const
{
    check_flow(x);
    if (form_ == LatencyForm::Polynomial) {
        double acc = 0.0;
        for (auto i = coef_.size(); i-- > 1;)
            acc = acc * x + static_cast<double>(i) * coef_[i];
        return acc;
    }
    return b_ * p_ / c_ * powi(x / c_, p_ - 1.0);
}

double LatencyFn::second(double x) const
{
    check_flow(x);
    if (form_ == LatencyForm::Polynomial) {
        double acc = 0.0;
        for (auto i = coef_.size(); i-- > 2;)
            acc = acc * x + static_cast<double>(i * (i - 1)) * coef_[i];
        return acc;
    }
    return b_ * p_ * (p_ - 1.0) / (c_ * c_) * powi(x / c_, p_ - 2.0);
}

double LatencyFn::third(double x) const
{
    check_flow(x);
    if (form_ == LatencyForm::Polynomial) {
        double acc = 0.0;
        for (auto i = coef_.size(); i-- > 3;)
            acc = acc * x + static_cast<double>(i * (i - 1) * (i - 2)) * coef_[i];
        return acc;
    }
    if (p_ == 2.0)
        return 0.0;
    return b_ * p_ * (p_ - 1.0) * (p_ - 2.0) / (c_ * c_ * c_) * powi(x / c_, p_ - 3.0);
}

double LatencyFn::integral(double x) const
{
    check_flow(x);
    if (form_ == LatencyForm::Polynomial) {
        double acc = 0.0;
        for (auto i = coef_.size(); i-- > 0;)
            acc = acc * x + coef_[i] / static_cast<double>(i + 1);
        return acc * x;
    }
    return a_ * x + b_ * c_ / (p_ + 1.0) * powi(x / c_, p_ + 1.0);
}

bool LatencyFn::third_derivative_positive() const
{
    if (form_ == LatencyForm::Polynomial) {
        for (std::size_t i = 3; i < coef_.size(); ++i)
            if (coef_[i] > 0.0)
                return true;
        return false;
    }
    return p_ > 2.0;
}

}  // namespace expresslane
