#pragma once

#include "stratgn/errors.hpp"
#include "stratgn/io.hpp"
#include "stratgn/kkt.hpp"
#include "stratgn/model.hpp"
#include "stratgn/oracles.hpp"
#include "stratgn/regularity.hpp"
#include "stratgn/report.hpp"
#include "stratgn/solver.hpp"
#include "stratgn/spectral.hpp"
#include "stratgn/sym_matrix.hpp"
#include "stratgn/synth.hpp"
