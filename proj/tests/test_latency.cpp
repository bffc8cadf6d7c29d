#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "expresslane/errors.hpp"
#include "expresslane/latency.hpp"

using namespace expresslane;

namespace {

std::vector<LatencyFn> sample_functions()
{
    return {
        LatencyFn::monomial(0.25, 2.0),
        LatencyFn::monomial(1.0 / 16.0, 4.0),
        LatencyFn::monomial(5.0, 4.0, 20.0),
        LatencyFn::bpr(15.0, 0.15 * 15.0, 1000.0, 4.0),
        LatencyFn::bpr(2.0, 0.5, 1.5, 2.5),
        LatencyFn::polynomial({1.0, 0.5, 0.25, 0.0, 0.1}),
    };
}

double central(const std::function<double(double)>& f, double x, double h)
{
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace

TEST(Latency, QuadraticQuarterValues)
{
    auto l = LatencyFn::monomial(0.25, 2.0);
    EXPECT_DOUBLE_EQ(l.eval(1.0), 0.25);
    EXPECT_DOUBLE_EQ(l.prime(1.0), 0.5);
    EXPECT_NEAR(l.integral(1.0), 1.0 / 12.0, 1e-15);
    EXPECT_DOUBLE_EQ(latency_eval(l, 1.0), 0.25);
    EXPECT_DOUBLE_EQ(latency_prime(l, 1.0), 0.5);
    EXPECT_NEAR(latency_integral(l, 1.0), 1.0 / 12.0, 1e-15);
}

TEST(Latency, QuarticSixteenthAtTwo)
{
    EXPECT_DOUBLE_EQ(LatencyFn::monomial(1.0 / 16.0, 4.0).eval(2.0), 1.0);
}

TEST(Latency, BprFreeFlow)
{
    auto l = LatencyFn::bpr(15.0, 0.15 * 15.0, 1000.0, 4.0);
    EXPECT_DOUBLE_EQ(l.eval(0.0), 15.0);
    EXPECT_NEAR(l.eval(1000.0), 15.0 * 1.15, 1e-12);
}

TEST(Latency, IntegralDerivativeMatchesEval)
{
    for (const auto& l : sample_functions()) {
        for (double x : {0.1, 0.5, 1.0, 2.0}) {
            double fd = central([&](double z) { return l.integral(z); }, x, 1e-5);
            EXPECT_NEAR(fd, l.eval(x), 1e-6 * std::abs(l.eval(x))) << "x=" << x;
        }
    }
}

TEST(Latency, DerivativesMatchFiniteDifferences)
{
    for (const auto& l : sample_functions()) {
        for (double x : {0.3, 0.5, 1.0, 2.0}) {
            double d1 = central([&](double z) { return l.eval(z); }, x, 1e-6);
            double d2 = central([&](double z) { return l.prime(z); }, x, 1e-6);
            double d3 = central([&](double z) { return l.second(z); }, x, 1e-6);
            EXPECT_NEAR(d1, l.prime(x), 1e-6 * (1.0 + std::abs(l.prime(x))));
            EXPECT_NEAR(d2, l.second(x), 1e-6 * (1.0 + std::abs(l.second(x))));
            EXPECT_NEAR(d3, l.third(x), 1e-5 * (1.0 + std::abs(l.third(x))));
        }
    }
}

TEST(Latency, MonotoneOnIncreasingGrid)
{
    for (const auto& l : sample_functions()) {
        double prev = l.eval(0.0);
        double prev_slope = l.prime(0.0);
        for (int i = 1; i <= 200; ++i) {
            double v = l.eval(0.01 * i);
            double s = l.prime(0.01 * i);
            EXPECT_GE(v, prev);
            EXPECT_GT(s, prev_slope);
            prev = v;
            prev_slope = s;
        }
    }
}

TEST(Latency, NegativeFlowRejected)
{
    auto l = LatencyFn::monomial(1.0, 2.0);
    for (auto f : {&LatencyFn::eval, &LatencyFn::prime, &LatencyFn::integral}) {
        try {
            (l.*f)(-0.1);
            FAIL() << "expected NegativeFlow";
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::NegativeFlow);
        }
    }
}

TEST(Latency, InvalidParametersRejected)
{
    auto expect_invalid = [](auto make) {
        try {
            make();
            FAIL() << "expected InvalidLatency";
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::InvalidLatency);
        }
    };
    expect_invalid([] { return LatencyFn::monomial(0.0, 2.0); });
    expect_invalid([] { return LatencyFn::monomial(1.0, 1.5); });
    expect_invalid([] { return LatencyFn::monomial(1.0, 2.0, -1.0); });
    expect_invalid([] { return LatencyFn::bpr(1.0, 1.0, 0.0, 4.0); });
    expect_invalid([] { return LatencyFn::polynomial({}); });
    expect_invalid([] { return LatencyFn::polynomial({1.0, -1.0, 1.0}); });
}

TEST(Latency, PolynomialHorner)
{
    auto l = LatencyFn::polynomial({1.0, 2.0, 3.0});
    EXPECT_DOUBLE_EQ(l.eval(2.0), 1.0 + 4.0 + 12.0);
    EXPECT_DOUBLE_EQ(l.prime(2.0), 2.0 + 12.0);
    EXPECT_DOUBLE_EQ(l.second(2.0), 6.0);
    EXPECT_DOUBLE_EQ(l.third(2.0), 0.0);
    EXPECT_DOUBLE_EQ(l.integral(2.0), 2.0 + 4.0 + 8.0);
}

TEST(Latency, ThirdDerivativeFlag)
{
    EXPECT_FALSE(LatencyFn::monomial(0.25, 2.0).third_derivative_positive());
    EXPECT_TRUE(LatencyFn::monomial(1.0, 4.0).third_derivative_positive());
    EXPECT_TRUE(LatencyFn::bpr(1.0, 1.0, 2.0, 3.0).third_derivative_positive());
    EXPECT_FALSE(LatencyFn::polynomial({0.0, 1.0, 1.0}).third_derivative_positive());
    EXPECT_TRUE(LatencyFn::polynomial({0.0, 0.0, 0.0, 1.0}).third_derivative_positive());
}
