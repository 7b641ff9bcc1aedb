#pragma once

// Representation-based classification methods: dictionaries, coefficient
// solvers, classifiers, evaluation statistics, and the experiment harness.

#include "rbcm/classify.hpp"
#include "rbcm/dataset.hpp"
#include "rbcm/dictionary.hpp"
#include "rbcm/errors.hpp"
#include "rbcm/eval.hpp"
#include "rbcm/experiment.hpp"
#include "rbcm/linalg.hpp"
#include "rbcm/rng.hpp"
#include "rbcm/solvers.hpp"
