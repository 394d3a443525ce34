#pragma once

#include <string>

namespace hbvm {

/// printf("%.17g"): round-trip precision used by every CSV/JSON writer.
std::string format_number(double v);

}  // namespace hbvm
