#include "mir/error.hpp"

#include <utility>

namespace mir {

InvalidArgument::InvalidArgument(std::string field, const std::string& message)
    : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

}  // namespace mir
