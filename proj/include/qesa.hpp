#pragma once

// Everything in one include.
#include "qesa/backends.hpp"
#include "qesa/baselines.hpp"
#include "qesa/bench.hpp"
#include "qesa/error.hpp"
#include "qesa/external_sampler.hpp"
#include "qesa/ising.hpp"
#include "qesa/mapping.hpp"
#include "qesa/qesa.hpp"
#include "qesa/qp.hpp"
#include "qesa/qp_io.hpp"
#include "qesa/report.hpp"
#include "qesa/rng.hpp"
#include "qesa/samplers.hpp"
#include "qesa/schedule.hpp"
