#pragma once

namespace weylfold {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace weylfold
