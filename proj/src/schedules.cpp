#include "thermopath/schedules.hpp"

#include <algorithm>
#include <cmath>

#include "thermopath/errors.hpp"

namespace thermo {

const char* to_string(ScheduleKind kind) {
    switch (kind) {
        case ScheduleKind::uniform: return "uniform";
        case ScheduleKind::powered_fraction: return "powered_fraction";
        case ScheduleKind::beta_quantile: return "beta_quantile";
        case ScheduleKind::refined: return "refined";
        case ScheduleKind::explicit_points: return "explicit";
    }
    return "unknown";
}

TemperatureSchedule::TemperatureSchedule(std::vector<double> points, ScheduleKind kind)
    : points_(std::move(points)), kind_(kind) {
    if (points_.size() < 2) throw DomainError("schedules", "a schedule needs at least the two endpoints");
    if (points_.front() != 0.0 || points_.back() != 1.0) {
        throw DomainError("schedules", "schedule must start at exactly 0 and end at exactly 1");
    }
    for (std::size_t i = 1; i < points_.size(); ++i) {
        if (!(points_[i] > points_[i - 1])) {
            throw DomainError("schedules", "schedule must be strictly increasing (index " + std::to_string(i) + ")");
        }
    }
}

std::size_t TemperatureSchedule::index_of(double t) const {
    auto it = std::lower_bound(points_.begin(), points_.end(), t);
    if (it == points_.end() || *it != t) return npos;
    return static_cast<std::size_t>(it - points_.begin());
}

TemperatureSchedule uniform_schedule(std::size_t n) {
    if (n == 0) throw DomainError("schedules", "n must be at least 1");
    std::vector<double> t(n + 1);
    for (std::size_t i = 0; i <= n; ++i) t[i] = static_cast<double>(i) / static_cast<double>(n);
    return TemperatureSchedule(std::move(t), ScheduleKind::uniform);
}

TemperatureSchedule powered_fraction_schedule(std::size_t n, double c) {
    if (n == 0) throw DomainError("schedules", "n must be at least 1");
    if (!(c >= 1.0) || !std::isfinite(c)) throw DomainError("schedules", "powered fraction exponent C must be >= 1");
    std::vector<double> t(n + 1);
    for (std::size_t i = 0; i <= n; ++i) t[i] = std::pow(static_cast<double>(i) / static_cast<double>(n), c);
    return TemperatureSchedule(std::move(t), ScheduleKind::powered_fraction);
}

TemperatureSchedule beta_quantile_schedule(std::size_t n, double a) {
    if (n == 0) throw DomainError("schedules", "n must be at least 1");
    if (!(a > 0.0 && a <= 1.0)) throw DomainError("schedules", "Beta(a, 1) schedule needs 0 < a <= 1");
    std::vector<double> t(n + 1);
    for (std::size_t i = 0; i <= n; ++i) t[i] = std::pow(static_cast<double>(i) / static_cast<double>(n), 1.0 / a);
    return TemperatureSchedule(std::move(t), ScheduleKind::beta_quantile);
}

TemperatureSchedule explicit_schedule(std::vector<double> points) {
    return TemperatureSchedule(std::move(points), ScheduleKind::explicit_points);
}

TemperatureSchedule refine_interval(const TemperatureSchedule& schedule, double lo, double hi, std::size_t k) {
    if (k == 0) throw ArgumentError("schedules", "refinement factor k must be positive");
    const auto i = schedule.index_of(lo);
    if (i == TemperatureSchedule::npos || i + 1 >= schedule.size() || schedule[i + 1] != hi) {
        throw ArgumentError("schedules", "refine_interval: lo and hi must be adjacent schedule points");
    }
    if (k == 1) return schedule;
    std::vector<double> t(schedule.points().begin(), schedule.points().end());
    std::vector<double> inserted;
    for (std::size_t j = 1; j < k; ++j) {
        inserted.push_back(lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(k));
    }
    t.insert(t.begin() + static_cast<std::ptrdiff_t>(i) + 1, inserted.begin(), inserted.end());
    return TemperatureSchedule(std::move(t), ScheduleKind::refined);
}

}  // namespace thermo
