#pragma once

#include "rana/alignment.hpp"
#include "rana/config.hpp"
#include "rana/denoising.hpp"
#include "rana/error.hpp"
#include "rana/evaluation.hpp"
#include "rana/experiment.hpp"
#include "rana/features.hpp"
#include "rana/graph.hpp"
#include "rana/influence.hpp"
#include "rana/labels.hpp"
#include "rana/oracle.hpp"
#include "rana/random.hpp"
#include "rana/selection.hpp"
