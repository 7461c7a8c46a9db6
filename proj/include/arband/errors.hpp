#pragma once

#include <stdexcept>
#include <string>

namespace arband {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Model / estimation failures
struct not_causal : error {
    using error::error;
};
struct numerical_error : error {
    using error::error;
};
struct lag_too_large : error {
    using error::error;
};
struct not_positive_definite : error {
    using error::error;
};

// Levinson recursion broke down: sigma2(m) <= 0 or |k_m| >= 1.
struct degenerate_error : error {
    degenerate_error(const std::string& msg, int failing_order)
        : error(msg), order(failing_order) {}
    int order;
};

// Argument / domain failures
struct invalid_dimension : error {
    using error::error;
};
struct domain_error : error {
    using error::error;
};
struct dimension_mismatch : error {
    using error::error;
};
struct invalid_range : error {
    using error::error;
};
struct degenerate_band : error {
    using error::error;
};

// Harness / IO failures
struct config_error : error {
    using error::error;
};
struct config_mismatch : error {
    using error::error;
};
struct io_error : error {
    using error::error;
};
struct empty_series : error {
    using error::error;
};
struct parse_error : error {
    parse_error(const std::string& msg, int line_number)
        : error(msg), line(line_number) {}
    int line;
};

}  // namespace arband
