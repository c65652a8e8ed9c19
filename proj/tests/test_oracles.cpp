#include "flowspectra/oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace flowspectra;

TEST(SphereOracle, PlugInValues)
{
    auto s = sphere_at(1.0, 2, 0.0);
    EXPECT_DOUBLE_EQ(s.radius, 1.0);
    EXPECT_DOUBLE_EQ(s.mean_curvature, 2.0);
    EXPECT_DOUBLE_EQ(s.lambda, 2.0);
    EXPECT_DOUBLE_EQ(s.singular_time, 0.25);

    s = sphere_at(1.0, 1, 0.25);
    EXPECT_NEAR(s.radius, std::sqrt(0.5), 1e-15);
    EXPECT_NEAR(s.mean_curvature, std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(s.lambda, 2.0, 1e-15);
    EXPECT_DOUBLE_EQ(s.singular_time, 0.5);

    s = sphere_at(2.0, 3, 0.0);
    EXPECT_DOUBLE_EQ(s.radius, 2.0);
    EXPECT_DOUBLE_EQ(s.mean_curvature, 1.5);
    EXPECT_DOUBLE_EQ(s.lambda, 0.75);
    EXPECT_DOUBLE_EQ(s.singular_time, 2.0 / 3.0);
}

TEST(SphereOracle, Domain)
{
    EXPECT_THROW(sphere_at(1.0, 2, 0.25), DomainError);
    EXPECT_THROW(sphere_at(1.0, 2, -0.1), DomainError);
    EXPECT_THROW(sphere_at(0.0, 2, 0.0), DomainError);
    EXPECT_THROW(sphere_at(1.0, 0, 0.0), DomainError);
    EXPECT_THROW(example_rate(1.0, 2, 0.3), DomainError);
}

TEST(ExampleRate, PlugInValues)
{
    EXPECT_DOUBLE_EQ(example_rate(1.0, 2, 0.0), 8.0);
    EXPECT_DOUBLE_EQ(example_rate(1.0, 1, 0.0), 2.0);
    double prev = 0.0;
    for (double t = 0.0; t < 0.25; t += 0.01) {
        const double r = example_rate(1.0, 2, t);
        EXPECT_GT(r, prev);
        prev = r;
    }
    EXPECT_GT(example_rate(1.0, 2, 0.25 - 1e-9), 1e15);
}

TEST(ExampleRate, MatchesDerivativeOfLambda)
{
    // lambda = n / (R^2 - 2 n t), so lambda' = 2 n^2 / (R^2 - 2 n t)^2
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> radius(0.1, 5.0);
    std::uniform_int_distribution<int> dim(1, 6);
    std::uniform_real_distribution<double> frac(0.0, 0.99);
    for (int i = 0; i < 200; ++i) {
        const double r = radius(gen);
        const int n = dim(gen);
        const double t = frac(gen) * sphere_singular_time(r, n);
        const double d = r * r - 2.0 * n * t;
        const double exact = 2.0 * n * n / (d * d);
        EXPECT_NEAR(example_rate(r, n, t), exact, 1e-12 * exact);
    }
}
