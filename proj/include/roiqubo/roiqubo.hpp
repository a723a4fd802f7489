#pragma once

#include "roiqubo/artifacts.hpp"
#include "roiqubo/classical.hpp"
#include "roiqubo/error.hpp"
#include "roiqubo/geometry.hpp"
#include "roiqubo/image.hpp"
#include "roiqubo/io.hpp"
#include "roiqubo/levels.hpp"
#include "roiqubo/metrics.hpp"
#include "roiqubo/phantom.hpp"
#include "roiqubo/pipeline.hpp"
#include "roiqubo/qubo.hpp"
#include "roiqubo/qubo_io.hpp"
#include "roiqubo/run_config.hpp"
#include "roiqubo/solvers.hpp"
#include "roiqubo/system_matrix.hpp"
