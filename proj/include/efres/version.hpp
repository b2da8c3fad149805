#ifndef EFRES_VERSION_HPP
#define EFRES_VERSION_HPP

namespace efres {

inline constexpr const char* version_string = "efres 0.1.0";

} // namespace efres

#endif
