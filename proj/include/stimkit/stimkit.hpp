#pragma once

#include "stimkit/augment.hpp"
#include "stimkit/core.hpp"
#include "stimkit/dataset.hpp"
#include "stimkit/image_io.hpp"
#include "stimkit/masking.hpp"
#include "stimkit/metrics.hpp"
#include "stimkit/parallel.hpp"
#include "stimkit/pipeline.hpp"
#include "stimkit/random.hpp"
#include "stimkit/tubemask.hpp"
