#pragma once

// Convenience include for the whole toolkit.

#include "sip/cli.hpp"
#include "sip/domain.hpp"
#include "sip/errors.hpp"
#include "sip/expr.hpp"
#include "sip/globalopt.hpp"
#include "sip/instance.hpp"
#include "sip/instance_io.hpp"
#include "sip/lower_bounding.hpp"
#include "sip/oracles.hpp"
#include "sip/trace.hpp"
