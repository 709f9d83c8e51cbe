#pragma once

#include "edgeless/attributes.hpp"
#include "edgeless/graph.hpp"
#include "edgeless/inference.hpp"
#include "edgeless/io.hpp"
#include "edgeless/knn.hpp"
#include "edgeless/loss.hpp"
#include "edgeless/matrix.hpp"
#include "edgeless/metrics.hpp"
#include "edgeless/model.hpp"
#include "edgeless/pipeline.hpp"
#include "edgeless/quadruplet.hpp"
#include "edgeless/rng.hpp"
#include "edgeless/sampling.hpp"
#include "edgeless/synthetic.hpp"
#include "edgeless/trainer.hpp"
