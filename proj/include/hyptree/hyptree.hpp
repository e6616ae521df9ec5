#pragma once

#include "hyptree/alignment.hpp"
#include "hyptree/branch_optimize.hpp"
#include "hyptree/configuration.hpp"
#include "hyptree/distance_matrix.hpp"
#include "hyptree/embedding.hpp"
#include "hyptree/four_point.hpp"
#include "hyptree/geometry.hpp"
#include "hyptree/io.hpp"
#include "hyptree/jukes_cantor.hpp"
#include "hyptree/neighbor_joining.hpp"
#include "hyptree/optimizer.hpp"
#include "hyptree/rng.hpp"
#include "hyptree/tree.hpp"
#include "hyptree/version.hpp"
