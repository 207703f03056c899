#pragma once

namespace gffpin {
inline constexpr const char* kCodeVersion = "gffpin 0.1.0";
}
