#pragma once

#include "cohortscope/stats.hpp"

#include <algorithm>
#include <vector>

// Tukey fences per cohort: values below Q1 - 1.5*IQR or above Q3 + 1.5*IQR.
// Quartiles interpolate linearly between order statistics. Cohorts with fewer
// than four samples get fences but no flags.

namespace cohortscope::outlier {

enum class Flag { none, low, high };

inline const char* to_string(Flag f) {
    switch (f) {
    case Flag::low: return "low";
    case Flag::high: return "high";
    default: return "none";
    }
}

inline constexpr std::size_t kMinFlagSamples = 4;
inline constexpr double kFenceFactor = 1.5;

struct Fences {
    double q1 = 0, q3 = 0, iqr = 0, low = 0, high = 0;
};

struct FlaggedValue {
    std::string sample_id;
    double value = 0.0;
    Flag flag = Flag::none;
};

struct CohortOutliers {
    Fences fences;
    std::vector<FlaggedValue> values;  // input order
};

struct OutlierReport {
    stats::Subject subject;
    stats::AbundanceMode mode = stats::AbundanceMode::absolute;
    CohortOutliers a;
    CohortOutliers b;

    const CohortOutliers& cohort(Role r) const { return r == Role::A ? a : b; }
};

inline Fences fences(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    Fences f;
    f.q1 = stats::quantile_sorted(values, 0.25);
    f.q3 = stats::quantile_sorted(values, 0.75);
    f.iqr = f.q3 - f.q1;
    f.low = f.q1 - kFenceFactor * f.iqr;
    f.high = f.q3 + kFenceFactor * f.iqr;
    return f;
}

inline CohortOutliers flag_cohort(const std::vector<stats::SampleValue>& values) {
    if (values.empty()) throw ArgumentError("outlier detection needs at least one value per cohort", "values");
    std::vector<double> raw;
    for (const auto& v : values) raw.push_back(v.value);
    CohortOutliers out;
    out.fences = fences(raw);
    const bool can_flag = values.size() >= kMinFlagSamples;
    for (const auto& v : values) {
        Flag flag = Flag::none;
        if (can_flag && v.value < out.fences.low) flag = Flag::low;
        if (can_flag && v.value > out.fences.high) flag = Flag::high;
        out.values.push_back({v.sample_id, v.value, flag});
    }
    return out;
}

inline OutlierReport flag_outliers(const stats::DistributionPair& pair) {
    return {pair.subject, pair.mode, flag_cohort(pair.values_a), flag_cohort(pair.values_b)};
}

}  // namespace cohortscope::outlier
