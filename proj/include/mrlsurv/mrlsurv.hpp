#pragma once

#include "mrlsurv/compare.hpp"
#include "mrlsurv/dataset.hpp"
#include "mrlsurv/error.hpp"
#include "mrlsurv/gpd.hpp"
#include "mrlsurv/km.hpp"
#include "mrlsurv/mrl.hpp"
#include "mrlsurv/nelder_mead.hpp"
#include "mrlsurv/quantile.hpp"
#include "mrlsurv/render.hpp"
#include "mrlsurv/rng.hpp"
#include "mrlsurv/step_function.hpp"
#include "mrlsurv/study_summary.hpp"
#include "mrlsurv/studystats.hpp"
