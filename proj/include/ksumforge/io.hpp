#pragma once

// Text instance format:
//   KXOR <k> <n> <r>  | KSUM <k> <N> <r>  | KMSUM <k> <L> <r>
// followed by r lines, one element each: lowercase hex padded to ceil(n/4)
// digits (KXOR), signed decimal (KSUM), unsigned decimal (KMSUM). LF endings,
// no trailing blank line.

#include <stdexcept>
#include <string>
#include <string_view>

#include "ksumforge/core.hpp"

namespace ksumforge {

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string format_instance(const Instance& inst);

/// Throws FormatError on malformed text; instance invariants (r >= k, ranges)
/// raise ParameterError from the constructors.
Instance parse_instance_text(std::string_view text);

Instance parse_instance(const std::string& path);
void write_instance(const Instance& inst, const std::string& path);

}  // namespace ksumforge
