#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace pcsim {

/// Base class for all pcsim errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Configuration rejected during validation. `field` is the dotted path of
/// the offending field (e.g. "scheduler.n_pilot").
struct config_error : error {
    config_error(std::string field_path, const std::string& message)
        : error(field_path + ": " + message), field(std::move(field_path)) {}
    std::string field;
};

/// Raised by operations that require a non-degenerate group (sigma > 0).
struct degenerate_group_error : error {
    using error::error;
};

}  // namespace pcsim
