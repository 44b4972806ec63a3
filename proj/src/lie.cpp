#include "epred/lie.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace epred {

namespace {

constexpr double kClosureTol = 1e-12;
constexpr double kMemberTol = 1e-9;
constexpr double kProjectionRadius = 0.1;
constexpr double kCutLocusMargin = 1e-6;

Eigen::Matrix3d skew3(const Eigen::Vector3d& w) {
    Eigen::Matrix3d m;
    m << 0.0, -w.z(), w.y(),
         w.z(), 0.0, -w.x(),
         -w.y(), w.x(), 0.0;
    return m;
}

bool orthogonal_member(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols() || !m.allFinite()) return false;
    const Eigen::MatrixXd e = m.transpose() * m - Eigen::MatrixXd::Identity(m.rows(), m.cols());
    return e.norm() <= kMemberTol && m.determinant() > 0.0;
}

// Polar factor with det +1: the nearest special-orthogonal matrix in Frobenius norm.
Eigen::MatrixXd nearest_special_orthogonal(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::MatrixXd u = svd.matrixU();
    const Eigen::MatrixXd v = svd.matrixV();
    if ((u * v.transpose()).determinant() < 0.0) u.col(u.cols() - 1) *= -1.0;
    return u * v.transpose();
}

std::vector<Eigen::MatrixXd> so_basis(int n) {
    std::vector<Eigen::MatrixXd> basis;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
            e(i, j) = -1.0;
            e(j, i) = 1.0;
            basis.push_back(std::move(e));
        }
    }
    return basis;
}

MatrixGroupDescriptor orthogonal_descriptor(std::string name, int n, std::vector<Eigen::MatrixXd> basis) {
    MatrixGroupDescriptor d;
    d.name = std::move(name);
    d.matrix_dim = n;
    d.basis = std::move(basis);
    d.is_member = orthogonal_member;
    d.nearest = nearest_special_orthogonal;
    d.inverse = [](const Eigen::MatrixXd& m) -> Eigen::MatrixXd { return m.transpose(); };
    return d;
}

}  // namespace

double pairing(const DualAlgebraElement& mu, const AlgebraElement& xi) {
    if (mu.size() != xi.size()) throw DescriptorMismatch("pairing: dual and algebra dimensions differ");
    return mu.coeffs().dot(xi.coeffs());
}

LieGroup::LieGroup(GroupKind kind, MatrixGroupDescriptor desc) : kind_(kind), desc_(std::move(desc)) {
    if (desc_.basis.empty()) throw LieError("group descriptor '" + desc_.name + "' has an empty basis");
    if (!desc_.is_member) throw LieError("group descriptor '" + desc_.name + "' has no membership test");
    const int n = desc_.matrix_dim;
    for (const auto& e : desc_.basis) {
        if (e.rows() != n || e.cols() != n) throw LieError("basis matrix has wrong shape");
    }
    kappa_scale_ = 1.0 / desc_.basis.front().squaredNorm();

    const int m = algebra_dim();
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const double g = kappa_scale_ * desc_.basis[i].cwiseProduct(desc_.basis[j]).sum();
            if (std::abs(g - (i == j ? 1.0 : 0.0)) > kClosureTol) {
                throw LieError("basis of '" + desc_.name + "' is not kappa-orthonormal");
            }
        }
    }

    // Bracket closure: every commutator must lie in the span of the basis.
    structure_.assign(m, Eigen::MatrixXd::Zero(m, m));
    for (int j = 0; j < m; ++j) {
        for (int k = 0; k < m; ++k) {
            const Eigen::MatrixXd c = desc_.basis[j] * desc_.basis[k] - desc_.basis[k] * desc_.basis[j];
            const AlgebraElement a = vee(c);
            if ((hat(a) - c).norm() > kClosureTol) {
                throw LieError("basis of '" + desc_.name + "' is not closed under the bracket");
            }
            for (int i = 0; i < m; ++i) structure_[i](j, k) = a[i];
        }
    }
}

GroupPtr LieGroup::so3() {
    auto d = orthogonal_descriptor("SO3", 3, {skew3(Eigen::Vector3d::UnitX()), skew3(Eigen::Vector3d::UnitY()),
                                              skew3(Eigen::Vector3d::UnitZ())});
    return std::make_shared<const LieGroup>(GroupKind::SO3, std::move(d));
}

GroupPtr LieGroup::special_orthogonal(int n) {
    if (n < 2) throw LieError("SO(n) requires n >= 2");
    auto d = orthogonal_descriptor("SO" + std::to_string(n) + "_generic", n, so_basis(n));
    if (n == 2) {
        d.closed_exp = [](const Eigen::MatrixXd& a) -> Eigen::MatrixXd {
            const double th = a(1, 0);
            Eigen::MatrixXd r(2, 2);
            r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
            return r;
        };
    }
    return std::make_shared<const LieGroup>(GroupKind::MatrixSubgroup, std::move(d));
}

GroupPtr LieGroup::from_descriptor(MatrixGroupDescriptor descriptor) {
    return std::make_shared<const LieGroup>(GroupKind::MatrixSubgroup, std::move(descriptor));
}

GroupPtr LieGroup::by_name(const std::string& name) {
    if (name == "SO3") return so3();
    if (name == "SO2") return special_orthogonal(2);
    if (name == "SO3_generic") return special_orthogonal(3);
    if (name == "SO4") return special_orthogonal(4);
    throw LieError("unknown group '" + name + "'");
}

void LieGroup::check_dim(int n, const char* what) const {
    if (n != algebra_dim()) {
        std::ostringstream os;
        os << what << ": element of dimension " << n << " used with group " << name() << " (algebra dimension "
           << algebra_dim() << ")";
        throw DescriptorMismatch(os.str());
    }
}

Eigen::MatrixXd LieGroup::hat(const AlgebraElement& xi) const {
    check_dim(xi.size(), "hat");
    if (kind_ == GroupKind::SO3) return skew3(xi.coeffs());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(matrix_dim(), matrix_dim());
    for (int k = 0; k < algebra_dim(); ++k) m += xi[k] * desc_.basis[k];
    return m;
}

AlgebraElement LieGroup::vee(const Eigen::MatrixXd& m) const {
    if (m.rows() != matrix_dim() || m.cols() != matrix_dim()) throw DescriptorMismatch("vee: matrix shape mismatch");
    if (kind_ == GroupKind::SO3) {
        return AlgebraElement(Eigen::Vector3d(0.5 * (m(2, 1) - m(1, 2)), 0.5 * (m(0, 2) - m(2, 0)),
                                              0.5 * (m(1, 0) - m(0, 1))));
    }
    Eigen::VectorXd c(algebra_dim());
    for (int k = 0; k < algebra_dim(); ++k) c[k] = kappa_scale_ * desc_.basis[k].cwiseProduct(m).sum();
    return AlgebraElement(std::move(c));
}

double LieGroup::kappa(const AlgebraElement& a, const AlgebraElement& b) const {
    check_dim(a.size(), "kappa");
    check_dim(b.size(), "kappa");
    return a.coeffs().dot(b.coeffs());
}

AlgebraElement LieGroup::bracket(const AlgebraElement& a, const AlgebraElement& b) const {
    check_dim(a.size(), "bracket");
    check_dim(b.size(), "bracket");
    if (kind_ == GroupKind::SO3) {
        const Eigen::Vector3d x = a.coeffs(), y = b.coeffs();
        return AlgebraElement(Eigen::VectorXd(x.cross(y)));
    }
    const Eigen::MatrixXd ha = hat(a), hb = hat(b);
    return vee(ha * hb - hb * ha);
}

DualAlgebraElement LieGroup::ad_star(const AlgebraElement& xi, const DualAlgebraElement& mu) const {
    check_dim(xi.size(), "ad_star");
    check_dim(mu.size(), "ad_star");
    const int m = algebra_dim();
    Eigen::VectorXd out(m);
    for (int k = 0; k < m; ++k) out[k] = pairing(mu, bracket(xi, AlgebraElement::unit(m, k)));
    return DualAlgebraElement(std::move(out));
}

AlgebraElement LieGroup::Ad(const GroupElement& g, const AlgebraElement& xi) const {
    require_member(g);
    check_dim(xi.size(), "Ad");
    if (kind_ == GroupKind::SO3) return AlgebraElement(Eigen::VectorXd(g.matrix() * xi.coeffs()));
    return vee(g.matrix() * hat(xi) * inverse(g).matrix());
}

GroupElement LieGroup::exp_map(const AlgebraElement& xi) const {
    check_dim(xi.size(), "exp_map");
    if (kind_ == GroupKind::SO3) {
        const Eigen::Vector3d w = xi.coeffs();
        const double th = w.norm();
        const Eigen::Matrix3d k = skew3(w);
        double a, b;
        if (th < 1e-4) {
            const double t2 = th * th;
            a = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
            b = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
        } else {
            a = std::sin(th) / th;
            b = (1.0 - std::cos(th)) / (th * th);
        }
        return GroupElement(Eigen::Matrix3d(Eigen::Matrix3d::Identity() + a * k + b * k * k));
    }
    const Eigen::MatrixXd h = hat(xi);
    if (desc_.closed_exp) return GroupElement((*desc_.closed_exp)(h));
    return GroupElement(h.exp());
}

AlgebraElement LieGroup::log_map(const GroupElement& g) const {
    require_member(g);
    if (kind_ == GroupKind::SO3) {
        const Eigen::Matrix3d r = g.matrix();
        const Eigen::Vector3d v(0.5 * (r(2, 1) - r(1, 2)), 0.5 * (r(0, 2) - r(2, 0)), 0.5 * (r(1, 0) - r(0, 1)));
        const double s = v.norm();
        const double c = 0.5 * (r.trace() - 1.0);
        const double th = std::atan2(s, c);
        if (th >= std::numbers::pi - kCutLocusMargin) {
            throw BranchError("log_map: rotation angle " + std::to_string(th) + " is at the cut locus");
        }
        const double f = th < 1e-4 ? 1.0 + th * th / 6.0 + 7.0 * th * th * th * th / 360.0 : th / std::sin(th);
        return AlgebraElement(Eigen::VectorXd(f * v));
    }
    const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(g.matrix().cast<std::complex<double>>());
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        if (std::abs(std::arg(es.eigenvalues()[i])) >= std::numbers::pi - kCutLocusMargin) {
            throw BranchError("log_map: eigenvalue at the cut locus");
        }
    }
    const AlgebraElement xi = vee(g.matrix().log());
    if ((exp_map(xi).matrix() - g.matrix()).norm() > 1e-8) throw BranchError("log_map: no principal logarithm");
    return xi;
}

DualAlgebraElement LieGroup::flat(const AlgebraElement& xi) const {
    check_dim(xi.size(), "flat");
    return DualAlgebraElement(xi.coeffs());
}

AlgebraElement LieGroup::sharp(const DualAlgebraElement& mu) const {
    check_dim(mu.size(), "sharp");
    return AlgebraElement(mu.coeffs());
}

GroupElement LieGroup::project_group(const Eigen::MatrixXd& m) const {
    if (m.rows() != matrix_dim() || m.cols() != matrix_dim()) throw DescriptorMismatch("project_group: shape mismatch");
    if (!m.allFinite()) throw ProjectionError("project_group: non-finite matrix");
    if (!desc_.nearest) throw ProjectionError("project_group: group '" + name() + "' has no projector");
    const Eigen::MatrixXd p = (*desc_.nearest)(m);
    const double dist = (m - p).norm();
    if (dist > kProjectionRadius) {
        throw ProjectionError("project_group: matrix at distance " + std::to_string(dist) + " from the group");
    }
    return GroupElement(p);
}

GroupElement LieGroup::identity() const {
    return GroupElement(Eigen::MatrixXd::Identity(matrix_dim(), matrix_dim()));
}

GroupElement LieGroup::inverse(const GroupElement& g) const {
    if (desc_.inverse) return GroupElement((*desc_.inverse)(g.matrix()));
    return GroupElement(g.matrix().inverse());
}

bool LieGroup::is_member(const Eigen::MatrixXd& m) const {
    if (m.rows() != matrix_dim() || m.cols() != matrix_dim()) return false;
    return desc_.is_member(m);
}

void LieGroup::require_member(const GroupElement& g) const {
    if (!is_member(g.matrix())) throw MembershipError("matrix is not an element of " + name());
}

}  // namespace epred
