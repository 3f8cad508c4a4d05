#pragma once

#include "ittm/analysis.hpp"
#include "ittm/dsl.hpp"
#include "ittm/encodings.hpp"
#include "ittm/error.hpp"
#include "ittm/graph.hpp"
#include "ittm/machine.hpp"
#include "ittm/ordinal.hpp"
#include "ittm/trace.hpp"
#include "ittm/transfinite.hpp"
