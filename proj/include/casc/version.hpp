#pragma once

namespace casc {
inline constexpr const char* kVersion = "0.1.0";
}
