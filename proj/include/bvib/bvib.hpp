#pragma once

// Umbrella header for the whole library.

#include "bvib/attack.hpp"
#include "bvib/checkpoint.hpp"
#include "bvib/config.hpp"
#include "bvib/consensus.hpp"
#include "bvib/data.hpp"
#include "bvib/errors.hpp"
#include "bvib/flops.hpp"
#include "bvib/ledger.hpp"
#include "bvib/matrix.hpp"
#include "bvib/nn.hpp"
#include "bvib/orchestrator.hpp"
#include "bvib/rng.hpp"
#include "bvib/sha256.hpp"
#include "bvib/split.hpp"
#include "bvib/vib.hpp"
