#pragma once

// Umbrella header for the EIS oral-lesion classification pipeline.

#include "impedscope/common.hpp"
#include "impedscope/dataset.hpp"
#include "impedscope/experiment.hpp"
#include "impedscope/folds.hpp"
#include "impedscope/geometry.hpp"
#include "impedscope/labels.hpp"
#include "impedscope/masks.hpp"
#include "impedscope/metrics.hpp"
#include "impedscope/models/fit.hpp"
#include "impedscope/pca.hpp"
#include "impedscope/pipeline.hpp"
#include "impedscope/preprocess.hpp"
#include "impedscope/ranking.hpp"
#include "impedscope/report.hpp"
#include "impedscope/rng.hpp"
#include "impedscope/stages.hpp"
#include "impedscope/stats.hpp"
#include "impedscope/synth.hpp"
