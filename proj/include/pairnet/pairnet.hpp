#pragma once

#include "pairnet/benchmark.hpp"
#include "pairnet/dataio.hpp"
#include "pairnet/dataset.hpp"
#include "pairnet/error.hpp"
#include "pairnet/incremental.hpp"
#include "pairnet/linalg.hpp"
#include "pairnet/mlp.hpp"
#include "pairnet/network.hpp"
#include "pairnet/partition.hpp"
#include "pairnet/random.hpp"
#include "pairnet/selection.hpp"
#include "pairnet/serialization.hpp"
#include "pairnet/trainer.hpp"
