#pragma once

#include "expcomp/bernoulli.hpp"
#include "expcomp/catalog.hpp"
#include "expcomp/controlled.hpp"
#include "expcomp/core_model.hpp"
#include "expcomp/dichotomy.hpp"
#include "expcomp/evolving.hpp"
#include "expcomp/lp.hpp"
#include "expcomp/rational.hpp"
#include "expcomp/replication.hpp"
#include "expcomp/sequential.hpp"
#include "expcomp/sufficiency.hpp"
#include "expcomp/value_oracle.hpp"
#include "expcomp/verdict.hpp"
