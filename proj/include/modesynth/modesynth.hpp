#pragma once

#include "modesynth/errors.hpp"
#include "modesynth/experiment.hpp"
#include "modesynth/glyphs.hpp"
#include "modesynth/image.hpp"
#include "modesynth/matrix.hpp"
#include "modesynth/msm.hpp"
#include "modesynth/rbm.hpp"
#include "modesynth/relu.hpp"
#include "modesynth/report.hpp"
#include "modesynth/rng.hpp"
#include "modesynth/stats.hpp"
#include "modesynth/verify.hpp"
