#pragma once

#include "cagefit/batch.hpp"
#include "cagefit/circuit.hpp"
#include "cagefit/corpus.hpp"
#include "cagefit/descent.hpp"
#include "cagefit/errors.hpp"
#include "cagefit/evolution.hpp"
#include "cagefit/formulation.hpp"
#include "cagefit/hybrid.hpp"
#include "cagefit/sampling.hpp"
