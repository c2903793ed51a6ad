#pragma once

namespace zms {
inline constexpr const char* version = "0.1.0";
}
