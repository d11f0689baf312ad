#pragma once

#include "resctl/archive.hpp"
#include "resctl/control.hpp"
#include "resctl/diagnostics.hpp"
#include "resctl/dynamics.hpp"
#include "resctl/errors.hpp"
#include "resctl/io.hpp"
#include "resctl/pulse.hpp"
#include "resctl/scenario.hpp"
#include "resctl/simplify.hpp"
#include "resctl/system.hpp"
