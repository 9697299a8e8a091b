#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

namespace tsbvp {

/// A finite time scale: strictly increasing grid points starting at 0.
///
/// Every operation in this library (jump operators, delta derivatives and
/// integrals, Taylor monomials) reduces to exact finite arithmetic over these
/// points. Instances are immutable after construction and safe to share
/// across threads. Lookups require exact membership; there is no
/// interpolation between grid points.
class TimeScale {
public:
    explicit TimeScale(std::vector<double> points) : points_(std::move(points)) {
        if (points_.size() < 2)
            throw std::invalid_argument("time scale needs at least 2 points");
        if (points_.front() != 0.0)
            throw std::invalid_argument("time scale must start at 0");
        for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
            if (!(points_[i] < points_[i + 1]))
                throw std::invalid_argument("time scale points must be strictly increasing");
        }
        for (double t : points_) {
            if (!std::isfinite(t))
                throw std::invalid_argument("time scale points must be finite");
        }
    }

    static std::shared_ptr<const TimeScale> from_points(std::vector<double> points) {
        return std::make_shared<const TimeScale>(std::move(points));
    }

    /// {0} plus the geometric points q^0, q^1, ..., q^K.
    /// Powers are built by repeated multiplication, so integer-valued q
    /// expands bit-exactly.
    static std::shared_ptr<const TimeScale> q_scale(double q, int k_max) {
        if (!(q > 1.0))
            throw std::invalid_argument("q-scale needs q > 1");
        if (k_max < 0)
            throw std::invalid_argument("q-scale needs K >= 0");
        std::vector<double> pts;
        pts.reserve(static_cast<std::size_t>(k_max) + 2);
        pts.push_back(0.0);
        double p = 1.0;
        for (int k = 0; k <= k_max; ++k) {
            pts.push_back(p);
            p *= q;
        }
        return from_points(std::move(pts));
    }

    /// {0, h, 2h, ..., T}; T must be an integer multiple of h.
    static std::shared_ptr<const TimeScale> uniform(double h, double horizon) {
        if (!(h > 0.0) || !(horizon > 0.0))
            throw std::invalid_argument("uniform scale needs h > 0 and T > 0");
        const double ratio = horizon / h;
        const auto steps = static_cast<long long>(std::llround(ratio));
        if (steps < 1 || std::abs(static_cast<double>(steps) * h - horizon) >
                             1e-9 * std::max(1.0, std::abs(horizon)))
            throw std::invalid_argument("uniform scale: T must be a multiple of h");
        std::vector<double> pts;
        pts.reserve(static_cast<std::size_t>(steps) + 1);
        for (long long i = 0; i < steps; ++i)
            pts.push_back(static_cast<double>(i) * h);
        pts.push_back(horizon);
        return from_points(std::move(pts));
    }

    std::size_t size() const { return points_.size(); }
    double point(std::size_t i) const { return points_[i]; }
    const std::vector<double>& points() const { return points_; }

    /// The final grid point T.
    double horizon() const { return points_.back(); }

    bool contains(double t) const {
        auto it = std::lower_bound(points_.begin(), points_.end(), t);
        return it != points_.end() && *it == t;
    }

    /// Index of an exact grid point; off-grid values are a domain error.
    std::size_t index_of(double t) const {
        auto it = std::lower_bound(points_.begin(), points_.end(), t);
        if (it == points_.end() || *it != t)
            throw std::domain_error("point is not on the time scale grid");
        return static_cast<std::size_t>(it - points_.begin());
    }

    /// Forward jump: least grid point above t; the horizon maps to itself.
    double sigma(double t) const { return points_[sigma_index(index_of(t))]; }

    /// Backward jump: greatest grid point below t; 0 maps to itself.
    double rho(double t) const {
        const std::size_t i = index_of(t);
        return i == 0 ? points_[0] : points_[i - 1];
    }

    /// k-fold forward jump; saturates at the horizon.
    double sigma_iter(double t, int k) const {
        if (k < 0)
            throw std::invalid_argument("sigma_iter needs k >= 0");
        std::size_t i = index_of(t);
        for (int j = 0; j < k; ++j)
            i = sigma_index(i);
        return points_[i];
    }

    /// Graininess mu(t) = sigma(t) - t; zero at the horizon.
    double graininess(double t) const { return mu_at(index_of(t)); }

    // Index forms used by the numeric kernels.
    std::size_t sigma_index(std::size_t i) const { return i + 1 < points_.size() ? i + 1 : i; }
    double mu_at(std::size_t i) const { return points_[sigma_index(i)] - points_[i]; }

private:
    std::vector<double> points_;
};

using TimeScalePtr = std::shared_ptr<const TimeScale>;

}  // namespace tsbvp
