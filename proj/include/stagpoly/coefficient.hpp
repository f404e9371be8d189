#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "geometry.hpp"

namespace stagpoly {

/// Symmetric positive definite 2x2 coefficient K(x). Cell-constant fields skip
/// quadrature-point sampling.
class CoefficientField {
public:
    using TensorFn = std::function<Eigen::Matrix2d(const Point2&, int cell)>;

    CoefficientField() : constant_(Eigen::Matrix2d::Identity()) {}

    static CoefficientField identity() { return constant(Eigen::Matrix2d::Identity()); }

    static CoefficientField constant(const Eigen::Matrix2d& k)
    {
        CoefficientField c;
        c.constant_ = k;
        return c;
    }

    static CoefficientField scalar(double kappa) { return constant(kappa * Eigen::Matrix2d::Identity()); }

    static CoefficientField per_cell(std::vector<Eigen::Matrix2d> values)
    {
        CoefficientField c;
        c.constant_.reset();
        c.per_cell_ = std::move(values);
        return c;
    }

    static CoefficientField per_cell_scalar(const std::vector<double>& kappa)
    {
        std::vector<Eigen::Matrix2d> values;
        values.reserve(kappa.size());
        for (double k : kappa)
            values.push_back(k * Eigen::Matrix2d::Identity());
        return per_cell(std::move(values));
    }

    static CoefficientField field(TensorFn fn)
    {
        CoefficientField c;
        c.constant_.reset();
        c.fn_ = std::move(fn);
        return c;
    }

    static CoefficientField scalar_field(std::function<double(const Point2&)> kappa)
    {
        return field([kappa = std::move(kappa)](const Point2& x, int) {
            return Eigen::Matrix2d(kappa(x) * Eigen::Matrix2d::Identity());
        });
    }

    bool is_cell_constant() const { return !fn_; }

    bool is_identity() const { return constant_ && constant_->isIdentity(0.0); }

    /// Checked evaluation; throws when the tensor is not SPD.
    Eigen::Matrix2d at(const Point2& x, int cell) const
    {
        Eigen::Matrix2d k;
        if (constant_)
            k = *constant_;
        else if (per_cell_)
            k = per_cell_->at(static_cast<std::size_t>(cell));
        else
            k = fn_(x, cell);
        check_spd(k, cell);
        return k;
    }

    Eigen::Matrix2d inverse_at(const Point2& x, int cell) const { return at(x, cell).inverse(); }

private:
    static void check_spd(const Eigen::Matrix2d& k, int cell)
    {
        const double asym = std::abs(k(0, 1) - k(1, 0));
        const bool finite = k.allFinite();
        if (!finite || asym > 1e-14 * k.norm() || !(k(0, 0) > 0.0) || !(k.determinant() > 0.0))
            fail(ErrorKind::coefficient, "coefficient is not symmetric positive definite in cell "
                                             + std::to_string(cell));
    }

    std::optional<Eigen::Matrix2d> constant_;
    std::optional<std::vector<Eigen::Matrix2d>> per_cell_;
    TensorFn fn_;
};

} // namespace stagpoly
