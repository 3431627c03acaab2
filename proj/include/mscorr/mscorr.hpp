#pragma once

#include "mscorr/analysis.hpp"
#include "mscorr/association.hpp"
#include "mscorr/crosscorr.hpp"
#include "mscorr/panel.hpp"
#include "mscorr/pipeline.hpp"
#include "mscorr/scaling.hpp"
#include "mscorr/surrogates.hpp"
#include "mscorr/synth.hpp"
