#include "flowspectra/generators.hpp"
#include "flowspectra/monotonicity.hpp"
#include "flowspectra/oracles.hpp"

#include <gtest/gtest.h>

using namespace flowspectra;

namespace {

template <DiscreteHypersurface M>
FlowTrace spectral_trace(const M& mesh, const SpeedLaw& law, double t_end, int cadence,
                         const WeightField& phi)
{
    EvolveOptions o;
    o.t_end = t_end;
    o.cadence = cadence;
    SpectralObserver<M> obs(phi);
    return evolve<M>(mesh, law, o, std::ref(obs));
}

template <DiscreteHypersurface M>
FlowTrace spectral_trace(const M& mesh, const SpeedLaw& law, double t_end, int cadence)
{
    return spectral_trace(mesh, law, t_end, cadence, WeightField::constant(mesh.num_vertices()));
}

/// Shared traces, computed once.
const FlowTrace& sphere_trace()
{
    static const FlowTrace tr = spectral_trace(icosphere(1.0, 3), SpeedLaw::mcf(), 0.15, 5);
    return tr;
}

const FlowTrace& circle_trace()
{
    static const FlowTrace tr = spectral_trace(regular_polygon(256), SpeedLaw::mcf(), 0.4, 10);
    return tr;
}

template <DiscreteHypersurface M>
VariationReport rhs_at_start(const M& mesh, const SpeedLaw& law, const WeightField& phi)
{
    const auto st = geometry_state(mesh);
    const auto eig = first_eigenpair(assemble(mesh, st, phi));
    return variation_rhs(mesh, st, phi, eig, law);
}

} // namespace

TEST(VariationRhs, SphereMatchesExampleRate)
{
    const auto m = icosphere(1.0, 4);
    const auto r = rhs_at_start(m, SpeedLaw::mcf(), WeightField::constant(m.num_vertices()));
    EXPECT_NEAR(r.rhs_general, 8.0, 0.4);
    EXPECT_DOUBLE_EQ(r.rhs_general, r.term_rayleigh + r.term_shape + r.term_area);
    // umbilic sphere: 2 int S h(grad f, grad f) = (2/n) int S H |grad f|^2
    EXPECT_NEAR(r.term_shape, -r.term_area, 0.03 * std::abs(r.term_area));
}

TEST(VariationRhs, CircleMatchesExampleRate)
{
    const auto c = regular_polygon(256);
    const auto r = rhs_at_start(c, SpeedLaw::mcf(), WeightField::constant(256));
    EXPECT_NEAR(r.rhs_general, 2.0, 0.04);
}

TEST(VariationRhs, StationarySphereUnderVolumePreservingFlow)
{
    const auto m = icosphere(1.0, 4);
    const auto r = rhs_at_start(m, SpeedLaw::volume_preserving(), WeightField::constant(m.num_vertices()));
    EXPECT_NEAR(r.rhs_general, 0.0, 1e-3);
}

TEST(VariationRhs, PowerOneEqualsMeanCurvatureFlow)
{
    const auto m = perturbed_icosphere(1.0, 3, 0.05, 3);
    const auto phi = WeightField::sample(m, [](const Eigen::Vector3d& p) { return 0.5 * p.z(); });
    const auto st = geometry_state(m);
    const auto eig = first_eigenpair(assemble(m, st, phi));
    const auto a = variation_rhs(m, st, phi, eig, SpeedLaw::mcf());
    const auto b = variation_rhs(m, st, phi, eig, SpeedLaw::power(1));
    EXPECT_EQ(a.rhs_general, b.rhs_general);
}

TEST(VariationRhs, SizeMismatch)
{
    const auto m = icosphere(1.0, 2);
    const auto st = geometry_state(m);
    EigenPair eig;
    eig.f = Eigen::VectorXd::Zero(3);
    EXPECT_THROW(variation_rhs(m, st, WeightField::constant(m.num_vertices()), eig, SpeedLaw::mcf()),
                 Error);
}

TEST(FiniteDifference, QuadraticSlopeIsExactOnQuadratics)
{
    auto q = [](double t) { return 3.0 - 2.0 * t + 5.0 * t * t; };
    const std::array<double, 3> ts = {0.1, 0.25, 0.7};
    const std::array<double, 3> ys = {q(0.1), q(0.25), q(0.7)};
    for (double t : {0.1, 0.25, 0.4, 0.7}) {
        EXPECT_NEAR(detail::quadratic_slope(ts, ys, t), -2.0 + 10.0 * t, 1e-12);
    }
}

TEST(FiniteDifference, SphereAndCircleTraces)
{
    EXPECT_NEAR(fd_lambda_dot(sphere_trace(), 0.0), 8.0, 0.4);
    EXPECT_NEAR(fd_lambda_dot(circle_trace(), 0.25), 8.0, 0.08);
    EXPECT_THROW(fd_lambda_dot(circle_trace(), 0.9), Error);
}

TEST(FiniteDifference, StationaryTrace)
{
    const auto tr = spectral_trace(icosphere(1.0, 3), SpeedLaw::volume_preserving(), 0.1, 10);
    EXPECT_NEAR(fd_lambda_dot(tr, 0.05), 0.0, 1e-6);
}

TEST(VariationCheck, SphereAndCircleTraces)
{
    for (const FlowTrace* tr : {&sphere_trace(), &circle_trace()}) {
        const auto cmp = compare_variation(*tr);
        EXPECT_LE(cmp.max_relative_error, 0.05);
        const double floor = tr->spectral_rows().front()->spectral->lambda /
                             (tr->dim == 1 ? 0.5 : 0.25);
        EXPECT_LE(compare_variation(*tr, floor).max_relative_error, 0.05);
        EXPECT_TRUE(check_variation(*tr).passed());
    }
}

TEST(VariationCheck, ExampleIdentityAlongSphereTrace)
{
    for (const auto* row : sphere_trace().spectral_rows()) {
        const double ratio = row->spectral->rhs_variation / row->spectral->lambda;
        const double expected = 2.0 * row->h_mean * row->h_mean / 2.0;
        EXPECT_NEAR(ratio, expected, 0.05 * expected);
    }
}

TEST(VariationCheck, NeedsThreeSamples)
{
    const auto tr = spectral_trace(regular_polygon(32), SpeedLaw::mcf(), 0.01, 1000000);
    EXPECT_THROW(compare_variation(tr), Error);
}

TEST(TheoremTt1, SphereAndCircle)
{
    for (const FlowTrace* tr : {&sphere_trace(), &circle_trace()}) {
        const auto v = check_theorem_tt1(*tr);
        EXPECT_TRUE(v.hypothesis_holds);
        EXPECT_TRUE(v.conclusion_holds);
        EXPECT_TRUE(v.passed());
        EXPECT_EQ(v.max_violation, 0.0);
    }
    EXPECT_NEAR(check_theorem_tt1(circle_trace()).details.at("eps_star_initial"), 1.0, 1e-12);
}

TEST(TheoremTt1, ElongatedEllipsoidIsVacuous)
{
    const auto tr = spectral_trace(ellipsoid(1, 1, 3, 3), SpeedLaw::mcf(), 0.01, 5);
    const auto v = check_theorem_tt1(tr);
    EXPECT_FALSE(v.hypothesis_holds);
    EXPECT_TRUE(v.passed());
}

TEST(TheoremTt1, DetectsDecrease)
{
    FlowTrace tr = circle_trace();
    auto rows = tr.spectral_rows();
    const_cast<TraceRow*>(rows[3])->spectral->lambda = rows[2]->spectral->lambda * 0.99;
    const auto v = check_theorem_tt1(tr);
    EXPECT_TRUE(v.hypothesis_holds);
    EXPECT_FALSE(v.conclusion_holds);
    EXPECT_FALSE(v.passed());
    EXPECT_GT(v.max_violation, 0.0);
}

TEST(TheoremTt1, RejectsOtherLaws)
{
    const auto tr = spectral_trace(regular_polygon(32), SpeedLaw::power(2), 0.01, 5);
    EXPECT_THROW(check_theorem_tt1(tr), Error);
}

TEST(TheoremHk, SphereUnderSquaredCurvature)
{
    const auto tr = spectral_trace(icosphere(1.0, 3), SpeedLaw::power(2), 0.03, 10);
    const auto v = check_theorem_hk(tr);
    EXPECT_TRUE(v.hypothesis_holds);
    EXPECT_TRUE(v.conclusion_holds);
    EXPECT_LE(v.details.at("spread_max"), v.details.at("spread_initial") + 1e-2);
}

TEST(TheoremHk, CircleUnderCubicCurvature)
{
    const auto tr = spectral_trace(regular_polygon(128), SpeedLaw::power(3), 0.05, 10);
    const auto v = check_theorem_hk(tr);
    EXPECT_TRUE(v.hypothesis_holds);
    EXPECT_TRUE(v.conclusion_holds);
    EXPECT_DOUBLE_EQ(v.details.at("spread_max"), 0.0);
}

TEST(TheoremHk, PowerOneAgreesWithTt1)
{
    const auto tr = spectral_trace(icosphere(1.0, 3), SpeedLaw::power(1), 0.05, 10);
    FlowTrace as_mcf = tr;
    as_mcf.law = SpeedLaw::mcf();
    EXPECT_EQ(check_theorem_hk(tr).conclusion_holds, check_theorem_tt1(as_mcf).conclusion_holds);
    EXPECT_TRUE(check_theorem_hk(tr).conclusion_holds);
}

TEST(MonotoneQuantities, StationarySphere)
{
    const auto tr = spectral_trace(icosphere(1.0, 3), SpeedLaw::squared_volume_preserving(), 0.05, 10);
    const auto series = monotone_quantities(tr);
    EXPECT_LE(series.c2, 1e-6);
    EXPECT_TRUE(series.bounds_hold);
    const double l0 = series.samples.front().lambda;
    for (const auto& q : series.samples) {
        EXPECT_NEAR(q.lambda, l0, 1e-6 * l0);
        EXPECT_LE(q.psi, q.phi_hi);
    }
    EXPECT_LE(series.c1, series.c3);
    EXPECT_TRUE(check_theorem_psi_phi(tr).passed());
}

TEST(MonotoneQuantities, PerturbedSphere)
{
    const auto tr =
        spectral_trace(perturbed_icosphere(1.0, 3, 0.05, 7), SpeedLaw::squared_volume_preserving(), 0.05, 5);
    for (auto variant : {DownExponent::AsWritten, DownExponent::Symmetric}) {
        const auto v = check_theorem_psi_phi(tr, variant);
        EXPECT_TRUE(v.hypothesis_holds);
        EXPECT_TRUE(v.conclusion_holds);
    }
    const auto series = monotone_quantities(tr);
    for (const auto& r : tr.rows) {
        EXPECT_LE(series.c1 * std::exp(-series.c2 * r.t), r.h_min * (1 + 1e-12));
        EXPECT_LE(r.h_max, series.c3);
    }
    FlowTrace with_q = tr;
    attach_monotone_quantities(with_q, series);
    std::size_t attached = 0;
    for (const auto& r : with_q.rows) {
        attached += r.q_up.has_value();
        EXPECT_EQ(r.q_up.has_value(), r.spectral.has_value());
    }
    EXPECT_EQ(attached, series.samples.size());
}

TEST(MonotoneQuantities, RejectsOtherLaws)
{
    EXPECT_THROW(monotone_quantities(circle_trace()), Error);
}

TEST(MetricComparison, UniformScalings)
{
    for (const auto& v : {check_metric_comparison(regular_polygon(256), WeightField::constant(256)),
                          check_metric_comparison(icosphere(1.0, 3), WeightField::constant(642))}) {
        EXPECT_TRUE(v.conclusion_holds);
        EXPECT_EQ(v.samples, 12u);
        EXPECT_LT(v.details.at("scaling_error_max"), 1e-10);
    }
}

TEST(AreaIdentity, FloorHandlesStationaryTraces)
{
    const auto tr = spectral_trace(icosphere(1.0, 3), SpeedLaw::volume_preserving(), 0.05, 10);
    EXPECT_LE(area_identity_error(tr, 1e-3), 0.05);
}
