#pragma once

#include <cmath>

#include "ftm/errors.hpp"

namespace ftm {

/// Duty-cycle current model of an FTM-performing board: deep sleep between
/// ranging operations, a fixed-duration burst of averaged FTM current per
/// period. Defaults are the measured board figures.
struct EnergyProfile {
    double i_sleep_ma = 0.5606;
    double i_ftm_avg_ma = 75.6;
    double t_ftm_s = 0.636;
    double battery_capacity_mah = 2000.0;

    void check() const {
        if (i_sleep_ma <= 0 || i_ftm_avg_ma <= 0 || t_ftm_s <= 0 || battery_capacity_mah <= 0) {
            throw Error(ErrorCode::InvalidArgument, "all profile values must be > 0");
        }
    }
};

inline void check_period(const EnergyProfile& p, double period_s) {
    p.check();
    if (period_s <= p.t_ftm_s) {
        throw Error(ErrorCode::PeriodTooShort, "measurement period must exceed t_ftm");
    }
}

/// Time-weighted average current over one measurement period (mA).
inline double average_current(const EnergyProfile& p, double period_s) {
    check_period(p, period_s);
    return (p.t_ftm_s * p.i_ftm_avg_ma + (period_s - p.t_ftm_s) * p.i_sleep_ma) / period_s;
}

/// Whole days of battery life at the given measurement period; fractional
/// days are floored to match how lifetimes are normally reported.
inline int battery_lifetime_days(const EnergyProfile& p, double period_s) {
    const double hours = p.battery_capacity_mah / average_current(p, period_s);
    return static_cast<int>(std::floor(hours / 24.0));
}

/// One day's charge split between the two operating modes.
struct DailyBudget {
    double idle_mah = 0.0;
    double ftm_mah = 0.0;
    double idle_time_fraction = 0.0;
};

inline DailyBudget daily_budget(const EnergyProfile& p, double period_s) {
    check_period(p, period_s);
    constexpr double kDayS = 86'400.0;
    const double ftm_fraction = p.t_ftm_s / period_s;
    DailyBudget b;
    b.idle_time_fraction = 1.0 - ftm_fraction;
    b.ftm_mah = p.i_ftm_avg_ma * (kDayS * ftm_fraction) / 3600.0;
    b.idle_mah = p.i_sleep_ma * (kDayS * b.idle_time_fraction) / 3600.0;
    return b;
}

}  // namespace ftm
