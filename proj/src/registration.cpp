#include "actrec/registration.hpp"

#include <string>

namespace actrec {

RegistrationMethod parse_registration(std::string_view name) {
  if (name == "lwsr") return RegistrationMethod::kLwsr;
  if (name == "dtw") return RegistrationMethod::kDtw;
  if (name == "none") return RegistrationMethod::kNone;
  throw ConfigError("unknown registration method '" + std::string(name) + "'");
}

std::string_view to_string(RegistrationMethod method) {
  switch (method) {
    case RegistrationMethod::kLwsr: return "lwsr";
    case RegistrationMethod::kDtw: return "dtw";
    case RegistrationMethod::kNone: return "none";
  }
  return "lwsr";
}

}  // namespace actrec
