#pragma once

namespace profmc {

inline constexpr const char* kLibraryVersion = "0.1.0";

// Pseudo-random stream: splitmix64 keyed per replicate, Gaussian variates by
// the AS241 inverse normal CDF. Versioned so manifests pin the exact stream.
inline constexpr const char* kPrngName = "splitmix64+as241";
inline constexpr const char* kPrngVersion = "1";

}  // namespace profmc
