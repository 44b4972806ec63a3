#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace epred {

/// Base class for all errors raised by the Lie kernel.
class LieError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operands come from groups of different dimension.
class DescriptorMismatch : public LieError {
public:
    using LieError::LieError;
};

/// A matrix failed the group membership test.
class MembershipError : public LieError {
public:
    using LieError::LieError;
};

/// log_map was asked for a point on (or too close to) the cut locus.
class BranchError : public LieError {
public:
    using LieError::LieError;
};

/// project_group received a matrix too far from the group.
class ProjectionError : public LieError {
public:
    using LieError::LieError;
};

/// Element of the Lie algebra, stored as coefficients in the group's
/// orthonormal basis.
class AlgebraElement {
public:
    AlgebraElement() = default;
    explicit AlgebraElement(Eigen::VectorXd coeffs) : coeffs_(std::move(coeffs)) {}

    static AlgebraElement zero(int dim) { return AlgebraElement(Eigen::VectorXd::Zero(dim)); }
    static AlgebraElement unit(int dim, int k) { return AlgebraElement(Eigen::VectorXd::Unit(dim, k)); }

    const Eigen::VectorXd& coeffs() const { return coeffs_; }
    Eigen::VectorXd& coeffs() { return coeffs_; }
    int size() const { return static_cast<int>(coeffs_.size()); }
    double operator[](int k) const { return coeffs_[k]; }
    double norm() const { return coeffs_.norm(); }
    bool is_finite() const { return coeffs_.allFinite(); }

    AlgebraElement& operator+=(const AlgebraElement& o) { coeffs_ += o.coeffs_; return *this; }
    AlgebraElement& operator-=(const AlgebraElement& o) { coeffs_ -= o.coeffs_; return *this; }
    AlgebraElement& operator*=(double s) { coeffs_ *= s; return *this; }
    friend AlgebraElement operator+(AlgebraElement a, const AlgebraElement& b) { return a += b; }
    friend AlgebraElement operator-(AlgebraElement a, const AlgebraElement& b) { return a -= b; }
    friend AlgebraElement operator-(AlgebraElement a) { a.coeffs_ = -a.coeffs_; return a; }
    friend AlgebraElement operator*(double s, AlgebraElement a) { return a *= s; }
    friend AlgebraElement operator*(AlgebraElement a, double s) { return a *= s; }
    friend AlgebraElement operator/(AlgebraElement a, double s) { return a *= 1.0 / s; }

private:
    Eigen::VectorXd coeffs_;
};

/// Element of the dual algebra, coefficients in the dual basis.
class DualAlgebraElement {
public:
    DualAlgebraElement() = default;
    explicit DualAlgebraElement(Eigen::VectorXd coeffs) : coeffs_(std::move(coeffs)) {}

    static DualAlgebraElement zero(int dim) { return DualAlgebraElement(Eigen::VectorXd::Zero(dim)); }
    static DualAlgebraElement unit(int dim, int k) { return DualAlgebraElement(Eigen::VectorXd::Unit(dim, k)); }

    const Eigen::VectorXd& coeffs() const { return coeffs_; }
    Eigen::VectorXd& coeffs() { return coeffs_; }
    int size() const { return static_cast<int>(coeffs_.size()); }
    double operator[](int k) const { return coeffs_[k]; }
    double norm() const { return coeffs_.norm(); }
    bool is_finite() const { return coeffs_.allFinite(); }

    DualAlgebraElement& operator+=(const DualAlgebraElement& o) { coeffs_ += o.coeffs_; return *this; }
    DualAlgebraElement& operator-=(const DualAlgebraElement& o) { coeffs_ -= o.coeffs_; return *this; }
    DualAlgebraElement& operator*=(double s) { coeffs_ *= s; return *this; }
    friend DualAlgebraElement operator+(DualAlgebraElement a, const DualAlgebraElement& b) { return a += b; }
    friend DualAlgebraElement operator-(DualAlgebraElement a, const DualAlgebraElement& b) { return a -= b; }
    friend DualAlgebraElement operator-(DualAlgebraElement a) { a.coeffs_ = -a.coeffs_; return a; }
    friend DualAlgebraElement operator*(double s, DualAlgebraElement a) { return a *= s; }
    friend DualAlgebraElement operator*(DualAlgebraElement a, double s) { return a *= s; }
    friend DualAlgebraElement operator/(DualAlgebraElement a, double s) { return a *= 1.0 / s; }

private:
    Eigen::VectorXd coeffs_;
};

/// Natural pairing <mu, xi> between the dual and the algebra.
double pairing(const DualAlgebraElement& mu, const AlgebraElement& xi);

/// Matrix representative of a group element.
class GroupElement {
public:
    GroupElement() = default;
    explicit GroupElement(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {}

    const Eigen::MatrixXd& matrix() const { return matrix_; }
    int size() const { return static_cast<int>(matrix_.rows()); }

    friend GroupElement operator*(const GroupElement& a, const GroupElement& b) {
        return GroupElement(a.matrix_ * b.matrix_);
    }

private:
    Eigen::MatrixXd matrix_;
};

enum class GroupKind { SO3, MatrixSubgroup };

/// Describes a matrix Lie group through a basis of its algebra. The basis
/// must be orthonormal for kappa(A, B) = scale * trace(A^T B), which is the
/// ad-invariant metric for compact subgroups of O(n).
struct MatrixGroupDescriptor {
    std::string name;
    int matrix_dim = 0;
    std::vector<Eigen::MatrixXd> basis;
    std::function<bool(const Eigen::MatrixXd&)> is_member;
    /// Closed-form exponential; when absent, Pade scaling-and-squaring is used.
    std::optional<std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>> closed_exp;
    /// Nearest-point projection onto the group; required for project_group.
    std::optional<std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>> nearest;
    /// Inverse shortcut (e.g. transpose for orthogonal groups).
    std::optional<std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>> inverse;
};

/// Exact Lie-algebraic kernel for a matrix group G.
///
/// All members are const and re-entrant; instances are cheap to share via
/// std::shared_ptr and safe to use from any number of threads.
class LieGroup {
public:
    /// SO(3) in the hat-map basis, kappa = dot product of coefficient vectors.
    static std::shared_ptr<const LieGroup> so3();
    /// SO(n) through the generic matrix path, basis E_ij - E_ji (i < j).
    static std::shared_ptr<const LieGroup> special_orthogonal(int n);
    /// Any compact matrix group described by a basis; validates the
    /// descriptor invariants and throws LieError when they fail.
    static std::shared_ptr<const LieGroup> from_descriptor(MatrixGroupDescriptor descriptor);
    /// Lookup by config name: "SO3", "SO2", "SO3_generic", "SO4".
    static std::shared_ptr<const LieGroup> by_name(const std::string& name);

    const std::string& name() const { return desc_.name; }
    GroupKind kind() const { return kind_; }
    int matrix_dim() const { return desc_.matrix_dim; }
    int algebra_dim() const { return static_cast<int>(desc_.basis.size()); }
    const std::vector<Eigen::MatrixXd>& basis() const { return desc_.basis; }

    /// Matrix of an algebra element.
    Eigen::MatrixXd hat(const AlgebraElement& xi) const;
    /// Kappa-orthogonal projection of an arbitrary square matrix onto the
    /// algebra, re-expanded in the basis.
    AlgebraElement vee(const Eigen::MatrixXd& m) const;

    double kappa(const AlgebraElement& a, const AlgebraElement& b) const;
    AlgebraElement bracket(const AlgebraElement& a, const AlgebraElement& b) const;
    /// Coadjoint action ad*_xi mu, defined by <ad*_xi mu, eta> = <mu, [xi, eta]>.
    DualAlgebraElement ad_star(const AlgebraElement& xi, const DualAlgebraElement& mu) const;
    AlgebraElement Ad(const GroupElement& g, const AlgebraElement& xi) const;

    GroupElement exp_map(const AlgebraElement& xi) const;
    AlgebraElement log_map(const GroupElement& g) const;

    DualAlgebraElement flat(const AlgebraElement& xi) const;
    AlgebraElement sharp(const DualAlgebraElement& mu) const;

    GroupElement project_group(const Eigen::MatrixXd& m) const;

    GroupElement identity() const;
    GroupElement inverse(const GroupElement& g) const;
    bool is_member(const Eigen::MatrixXd& m) const;
    /// Throws MembershipError when g is not in the group.
    void require_member(const GroupElement& g) const;

    /// Structure constants c[i](j,k) with [e_j, e_k] = sum_i c[i](j,k) e_i.
    const std::vector<Eigen::MatrixXd>& structure_constants() const { return structure_; }

    LieGroup(GroupKind kind, MatrixGroupDescriptor desc);

private:
    void check_dim(int n, const char* what) const;

    GroupKind kind_;
    MatrixGroupDescriptor desc_;
    double kappa_scale_ = 1.0;
    std::vector<Eigen::MatrixXd> structure_;
};

using GroupPtr = std::shared_ptr<const LieGroup>;

}  // namespace epred
