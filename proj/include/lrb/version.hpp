#pragma once

namespace lrb {

inline constexpr const char* kVersion = "lrb 0.1.0";

}
