#pragma once

#include "mixrecon/error.hpp"
#include "mixrecon/harness.hpp"
#include "mixrecon/identifiability.hpp"
#include "mixrecon/json_io.hpp"
#include "mixrecon/kmer.hpp"
#include "mixrecon/linalg.hpp"
#include "mixrecon/metrics.hpp"
#include "mixrecon/mixture_sim.hpp"
#include "mixrecon/nnls.hpp"
#include "mixrecon/parallel.hpp"
#include "mixrecon/read_matrix.hpp"
#include "mixrecon/reconstruct.hpp"
#include "mixrecon/rng.hpp"
#include "mixrecon/sequence_db.hpp"
