#pragma once

#include <stdexcept>
#include <string>

namespace marginmine {

// Base class for all input/usage errors. The CLI maps these to exit code 2;
// anything else escaping to main is an internal error (exit code 1).
struct error : std::runtime_error {
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Bad magic bytes, malformed headers, unparseable files.
struct format_error : error {
    using error::error;
};

// Payload shorter or longer than the header declares.
struct length_error : error {
    using error::error;
};

// Values that violate data invariants (non-finite entries, zero-norm rows).
struct data_error : error {
    using error::error;
};

// Dimension or size mismatches between otherwise valid inputs.
struct shape_error : error {
    using error::error;
};

// Not enough data for the requested operation (e.g. k-means with k > count).
struct capacity_error : error {
    using error::error;
};

// Out-of-range or malformed parameters (nprobe, threshold ranges, ...).
struct parameter_error : error {
    using error::error;
};

// Cross-references that do not resolve (dangling ids, misaligned label files).
struct consistency_error : error {
    using error::error;
};

// Unsupported or contradictory configuration (e.g. Thai segmentation).
struct config_error : error {
    using error::error;
};

// Filesystem failures, always carrying the offending path.
struct io_error : error {
    using error::error;
};

} // namespace marginmine
