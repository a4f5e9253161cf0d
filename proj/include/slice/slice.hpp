// Umbrella header.

#pragma once

#include "slice/descriptor.hpp"
#include "slice/detection.hpp"
#include "slice/error.hpp"
#include "slice/factor.hpp"
#include "slice/latent.hpp"
#include "slice/partition.hpp"
#include "slice/pipeline.hpp"
#include "slice/rng.hpp"
#include "slice/secret_key.hpp"
#include "slice/simulation.hpp"
#include "slice/simulation_io.hpp"
#include "slice/synthesis.hpp"
#include "slice/theory.hpp"
