#pragma once

#include "itopic/cluster.hpp"
#include "itopic/compare.hpp"
#include "itopic/error.hpp"
#include "itopic/io.hpp"
#include "itopic/iterate.hpp"
#include "itopic/partition.hpp"
#include "itopic/rundir.hpp"
#include "itopic/text.hpp"
#include "itopic/topicrep.hpp"
#include "itopic/vectorize.hpp"

namespace itopic {
inline constexpr std::string_view kVersion = "0.1.0";
}
