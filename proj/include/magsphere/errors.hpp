#ifndef MAGSPHERE_ERRORS_HPP
#define MAGSPHERE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace magsphere {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define MAGSPHERE_DEFINE_ERROR(NAME)                                   \
    struct NAME : Error {                                              \
        explicit NAME(const std::string& msg) : Error(#NAME ": " + msg) {} \
    }

MAGSPHERE_DEFINE_ERROR(NonEvaluable);
MAGSPHERE_DEFINE_ERROR(DegenerateProfile);
MAGSPHERE_DEFINE_ERROR(InfeasibleSpec);
MAGSPHERE_DEFINE_ERROR(InfeasibleParams);
MAGSPHERE_DEFINE_ERROR(PoleChart);
MAGSPHERE_DEFINE_ERROR(ChartBreakdown);
MAGSPHERE_DEFINE_ERROR(NonContactSample);
MAGSPHERE_DEFINE_ERROR(CriticalLevel);
MAGSPHERE_DEFINE_ERROR(NonMonotone);
MAGSPHERE_DEFINE_ERROR(NonClosed);
MAGSPHERE_DEFINE_ERROR(NonClosedOrbit);
MAGSPHERE_DEFINE_ERROR(NotNormalized);
MAGSPHERE_DEFINE_ERROR(UnderResolved);
MAGSPHERE_DEFINE_ERROR(ConfigError);

#undef MAGSPHERE_DEFINE_ERROR

} // namespace magsphere

#endif
