#pragma once

namespace l2sp {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace l2sp
