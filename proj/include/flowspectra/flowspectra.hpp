#pragma once

#include "flowspectra/config.hpp"
#include "flowspectra/error.hpp"
#include "flowspectra/experiment.hpp"
#include "flowspectra/expression.hpp"
#include "flowspectra/flow.hpp"
#include "flowspectra/generators.hpp"
#include "flowspectra/geometry.hpp"
#include "flowspectra/io.hpp"
#include "flowspectra/mesh.hpp"
#include "flowspectra/monotonicity.hpp"
#include "flowspectra/oracles.hpp"
#include "flowspectra/spectral.hpp"
#include "flowspectra/svg_plot.hpp"
