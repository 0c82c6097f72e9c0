#pragma once

namespace alacs {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace alacs
