#pragma once

#include <string>

#include "forcerecon/forcing/enslaving_map.hpp"

namespace forcerecon {

/// Text form of an enslaving map, e.g.
///
///   kind = power_law_tail
///   rank = 2
///   alpha = -1
///   beta = -1
///   dim = 2
///   profile = power          # or exponential
///   exponent = 4
///   weight = 1
///   override = 1 1 0.5       # wavevector components then weight; repeatable
///
/// fourierwise maps list `entry = <target> <source> <gain re> <gain im>`.
/// Custom (function-valued) entries have no text form.
EnslavingMap parse_map_descriptor(const std::string& text, const std::string& source_name = "<map>");
EnslavingMap load_map_descriptor(const std::string& path);
std::string format_map_descriptor(const EnslavingMap& map);

}  // namespace forcerecon
