#include "vpp/version.hpp"

static_assert(vpp::kVersionMajor == 0);
