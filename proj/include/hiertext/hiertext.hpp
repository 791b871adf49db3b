#pragma once

#include "hiertext/config.hpp"
#include "hiertext/csv.hpp"
#include "hiertext/data.hpp"
#include "hiertext/ensemble.hpp"
#include "hiertext/error.hpp"
#include "hiertext/eval.hpp"
#include "hiertext/features.hpp"
#include "hiertext/model.hpp"
#include "hiertext/model_io.hpp"
#include "hiertext/predictions.hpp"
#include "hiertext/rng.hpp"
#include "hiertext/taxonomy.hpp"
