#pragma once

#include "cdae/architecture.hpp"
#include "cdae/classify.hpp"
#include "cdae/csv.hpp"
#include "cdae/error.hpp"
#include "cdae/eval.hpp"
#include "cdae/features.hpp"
#include "cdae/image.hpp"
#include "cdae/layers.hpp"
#include "cdae/model.hpp"
#include "cdae/parallel.hpp"
#include "cdae/rng.hpp"
#include "cdae/synth.hpp"
#include "cdae/tensor.hpp"
#include "cdae/training.hpp"
