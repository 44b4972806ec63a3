#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "epred/lie.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace epred;

namespace {

AlgebraElement rnd(int n, double scale = 1.0) { return AlgebraElement(oracle::random_vector(n, scale)); }

const std::vector<std::string> kGroups{"SO3", "SO3_generic", "SO2", "SO4"};

}  // namespace

TEST_CASE("so3 hat map matches the skew-symmetric matrix") {
    const auto g = LieGroup::so3();
    for (int k = 0; k < 20; ++k) {
        const Eigen::Vector3d v = oracle::random_vector(3);
        CHECK((g->hat(AlgebraElement(v)) - oracle::skew(v)).norm() < 1e-15);
        CHECK((g->vee(oracle::skew(v)).coeffs() - v).norm() < 1e-15);
    }
}

TEST_CASE("so3 bracket is the cross product and kappa the dot product") {
    const auto g = LieGroup::so3();
    for (int k = 0; k < 50; ++k) {
        const Eigen::Vector3d a = oracle::random_vector(3), b = oracle::random_vector(3);
        CHECK((g->bracket(AlgebraElement(a), AlgebraElement(b)).coeffs() - a.cross(b)).norm() < 1e-15);
        CHECK(g->kappa(AlgebraElement(a), AlgebraElement(b)) == doctest::Approx(a.dot(b)).epsilon(1e-14));
        // negative half trace form
        const double tr = -0.5 * (oracle::skew(a) * oracle::skew(b)).trace();
        CHECK(std::abs(g->kappa(AlgebraElement(a), AlgebraElement(b)) - tr) < 1e-14);
    }
}

TEST_CASE("so3 ad_star is mu cross xi") {
    const auto g = LieGroup::so3();
    for (int k = 0; k < 50; ++k) {
        const Eigen::Vector3d xi = oracle::random_vector(3), mu = oracle::random_vector(3);
        const auto r = g->ad_star(AlgebraElement(xi), DualAlgebraElement(mu));
        CHECK((r.coeffs() - mu.cross(xi)).norm() < 1e-15);
    }
}

TEST_CASE("so3 exp agrees with the axis-angle rotation and a Taylor series") {
    const auto g = LieGroup::so3();
    for (int k = 0; k < 50; ++k) {
        const Eigen::Vector3d v = oracle::random_vector(3, 2.0);
        const Eigen::MatrixXd e = g->exp_map(AlgebraElement(v)).matrix();
        CHECK((e - Eigen::MatrixXd(oracle::axis_angle(v, v.norm()))).norm() < 1e-14);
        CHECK((e - oracle::expm_taylor(oracle::skew(v))).norm() < 1e-13);
    }
}

TEST_CASE("so3 exp and log near the identity keep full relative accuracy") {
    const auto g = LieGroup::so3();
    for (double s : {1e-3, 1e-6, 1e-9, 1e-12, 0.0}) {
        const Eigen::Vector3d v = Eigen::Vector3d(0.3, -0.5, 0.8) * s;
        const AlgebraElement xi(v);
        const GroupElement e = g->exp_map(xi);
        CHECK((e.matrix() - oracle::expm_taylor(oracle::skew(v))).norm() <= 1e-15);
        const double err = (g->log_map(e).coeffs() - v).norm();
        CHECK(err <= 1e-15 * std::max(1.0, v.norm()));
        if (s > 0) CHECK(err <= 1e-10 * v.norm());
    }
}

TEST_CASE("so3 log at large angles and at the cut locus") {
    const auto g = LieGroup::so3();
    const Eigen::Vector3d axis = Eigen::Vector3d(1, 2, -2).normalized();
    for (double th : {1.0, 2.5, 3.0, M_PI - 1e-3}) {
        const GroupElement r(Eigen::MatrixXd(oracle::axis_angle(axis, th)));
        CHECK((g->log_map(r).coeffs() - th * axis).norm() < 1e-9);
    }
    const GroupElement flip(Eigen::MatrixXd(oracle::axis_angle(axis, M_PI)));
    CHECK_THROWS_AS(g->log_map(flip), BranchError);
    CHECK_THROWS_AS(g->log_map(GroupElement(Eigen::MatrixXd(oracle::axis_angle(axis, M_PI - 1e-8)))), BranchError);
}

TEST_CASE("Ad is conjugation of the hat matrix") {
    for (const auto& name : kGroups) {
        const auto g = LieGroup::by_name(name);
        for (int k = 0; k < 10; ++k) {
            const GroupElement x = g->exp_map(rnd(g->algebra_dim()));
            const AlgebraElement xi = rnd(g->algebra_dim());
            const Eigen::MatrixXd conj = x.matrix() * g->hat(xi) * x.matrix().transpose();
            CHECK((g->hat(g->Ad(x, xi)) - conj).norm() < 1e-13);
        }
    }
}

TEST_CASE("Lie identities hold for every bundled group") {
    for (const auto& name : kGroups) {
        CAPTURE(name);
        const auto g = LieGroup::by_name(name);
        const int n = g->algebra_dim();
        for (int k = 0; k < 100; ++k) {
            const AlgebraElement a = rnd(n), b = rnd(n), c = rnd(n);
            const DualAlgebraElement mu(oracle::random_vector(n));
            const AlgebraElement jac =
                g->bracket(a, g->bracket(b, c)) + g->bracket(b, g->bracket(c, a)) + g->bracket(c, g->bracket(a, b));
            CHECK(jac.norm() <= 1e-12);
            CHECK(std::abs(g->kappa(g->bracket(a, b), c) + g->kappa(b, g->bracket(a, c))) <= 1e-12);
            CHECK(std::abs(pairing(g->ad_star(a, mu), b) - pairing(mu, g->bracket(a, b))) <= 1e-12);
            CHECK(g->ad_star(a, g->flat(a)).norm() <= 1e-13);
            CHECK((g->bracket(a, b) + g->bracket(b, a)).norm() <= 1e-15);
            CHECK((g->sharp(g->flat(a)) - a).norm() <= 1e-15);
            const AlgebraElement xi = rnd(n, 1.5);
            CHECK((g->log_map(g->exp_map(xi)) - xi).norm() <= 1e-12);
        }
    }
}

TEST_CASE("bracket matches the matrix commutator") {
    for (const auto& name : kGroups) {
        const auto g = LieGroup::by_name(name);
        const AlgebraElement a = rnd(g->algebra_dim()), b = rnd(g->algebra_dim());
        const Eigen::MatrixXd comm = g->hat(a) * g->hat(b) - g->hat(b) * g->hat(a);
        CHECK((g->hat(g->bracket(a, b)) - comm).norm() < 1e-14);
    }
}

TEST_CASE("generic exp matches the Taylor oracle") {
    for (const auto& name : {"SO3_generic", "SO4", "SO2"}) {
        const auto g = LieGroup::by_name(name);
        for (int k = 0; k < 10; ++k) {
            const AlgebraElement xi = rnd(g->algebra_dim(), 1.2);
            CHECK((g->exp_map(xi).matrix() - oracle::expm_taylor(g->hat(xi))).norm() < 1e-12);
        }
    }
}

TEST_CASE("generic SO(3) agrees with the closed-form SO(3) on matrices") {
    const auto closed = LieGroup::so3();
    const auto generic = LieGroup::by_name("SO3_generic");
    for (int k = 0; k < 20; ++k) {
        const Eigen::Vector3d v = oracle::random_vector(3, 2.0);
        const AlgebraElement xg = generic->vee(oracle::skew(v));
        CHECK((generic->exp_map(xg).matrix() - closed->exp_map(AlgebraElement(v)).matrix()).norm() < 1e-12);
        const GroupElement r = closed->exp_map(AlgebraElement(v));
        CHECK((generic->hat(generic->log_map(r)) - oracle::skew(v)).norm() < 1e-10);
    }
}

TEST_CASE("SO(2) is abelian") {
    const auto g = LieGroup::by_name("SO2");
    CHECK(g->algebra_dim() == 1);
    const AlgebraElement a = rnd(1), b = rnd(1);
    CHECK(g->bracket(a, b).norm() == 0.0);
    const double th = 0.7;
    const Eigen::MatrixXd r = g->exp_map(AlgebraElement(Eigen::VectorXd::Constant(1, th))).matrix();
    CHECK(std::abs(std::abs(r(0, 1)) - std::sin(th)) < 1e-15);
    CHECK(std::abs(r(0, 0) - std::cos(th)) < 1e-15);
}

TEST_CASE("structure constants reproduce the bracket") {
    const auto g = LieGroup::by_name("SO4");
    const auto& c = g->structure_constants();
    const int n = g->algebra_dim();
    const AlgebraElement a = rnd(n), b = rnd(n);
    Eigen::VectorXd expect(n);
    for (int i = 0; i < n; ++i) expect[i] = a.coeffs().dot(c[i] * b.coeffs());
    CHECK((g->bracket(a, b).coeffs() - expect).norm() < 1e-14);
}

TEST_CASE("membership, inverse and projection") {
    const auto g = LieGroup::so3();
    const GroupElement x = g->exp_map(rnd(3));
    CHECK(g->is_member(x.matrix()));
    CHECK(((x * g->inverse(x)).matrix() - Eigen::Matrix3d::Identity()).norm() < 1e-15);
    CHECK_NOTHROW(g->require_member(x));
    Eigen::MatrixXd bad = x.matrix();
    bad(0, 0) += 1e-3;
    CHECK_FALSE(g->is_member(bad));
    CHECK_THROWS_AS(g->require_member(GroupElement(bad)), MembershipError);
    CHECK_THROWS_AS(g->require_member(GroupElement(Eigen::MatrixXd(-Eigen::Matrix3d::Identity()))), MembershipError);

    const GroupElement p = g->project_group(bad);
    CHECK(g->is_member(p.matrix()));
    CHECK((p.matrix() - x.matrix()).norm() < 2e-3);
    CHECK_THROWS_AS(g->project_group(Eigen::MatrixXd::Zero(3, 3)), ProjectionError);
    Eigen::MatrixXd nan = x.matrix();
    nan(1, 1) = NAN;
    CHECK_THROWS_AS(g->project_group(nan), ProjectionError);
}

TEST_CASE("dimension mismatches are rejected") {
    const auto g3 = LieGroup::so3();
    const auto g4 = LieGroup::by_name("SO4");
    CHECK_THROWS_AS(g3->bracket(rnd(3), rnd(6)), DescriptorMismatch);
    CHECK_THROWS_AS(g3->vee(Eigen::MatrixXd::Zero(4, 4)), DescriptorMismatch);
    CHECK_THROWS_AS(pairing(DualAlgebraElement(oracle::random_vector(3)), rnd(6)), DescriptorMismatch);
    CHECK_THROWS_AS(g4->exp_map(rnd(3)), DescriptorMismatch);
    CHECK_THROWS_AS(LieGroup::by_name("SU7"), LieError);
}

TEST_CASE("descriptor validation catches bad bases") {
    MatrixGroupDescriptor d;
    d.name = "bad";
    d.matrix_dim = 3;
    d.is_member = [](const Eigen::MatrixXd&) { return true; };
    CHECK_THROWS_AS(LieGroup::from_descriptor(d), LieError);

    // not closed under the bracket: two of the three so(3) generators
    d.basis = {oracle::skew(Eigen::Vector3d::UnitX()), oracle::skew(Eigen::Vector3d::UnitY())};
    CHECK_THROWS_AS(LieGroup::from_descriptor(d), LieError);

    // not orthonormal
    d.basis = {oracle::skew(Eigen::Vector3d::UnitX()), 2.0 * oracle::skew(Eigen::Vector3d::UnitY()),
               oracle::skew(Eigen::Vector3d::UnitZ())};
    CHECK_THROWS_AS(LieGroup::from_descriptor(d), LieError);

    d.basis = {oracle::skew(Eigen::Vector3d::UnitX()), oracle::skew(Eigen::Vector3d::UnitY()),
               oracle::skew(Eigen::Vector3d::UnitZ())};
    d.is_member = [](const Eigen::MatrixXd& m) {
        return (m.transpose() * m - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-10 && m.determinant() > 0;
    };
    const auto g = LieGroup::from_descriptor(d);
    CHECK(g->algebra_dim() == 3);
    const AlgebraElement a = rnd(3);
    CHECK((g->exp_map(a).matrix() - oracle::expm_taylor(g->hat(a))).norm() < 1e-12);
}
