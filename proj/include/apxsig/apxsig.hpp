#pragma once

#include "apxsig/arith.hpp"
#include "apxsig/dse.hpp"
#include "apxsig/energy.hpp"
#include "apxsig/errors.hpp"
#include "apxsig/experiment.hpp"
#include "apxsig/library.hpp"
#include "apxsig/pantompkins.hpp"
#include "apxsig/quality.hpp"
#include "apxsig/signal_io.hpp"
#include "apxsig/stage.hpp"
