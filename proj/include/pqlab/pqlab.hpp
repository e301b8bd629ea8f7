#pragma once

#include "pqlab/core.hpp"
#include "pqlab/node_pool.hpp"
#include "pqlab/oracle.hpp"
#include "pqlab/array_heaps.hpp"
#include "pqlab/binomial_heap.hpp"
#include "pqlab/fibonacci_heap.hpp"
#include "pqlab/pairing_heap.hpp"
#include "pqlab/rank_pairing_heap.hpp"
#include "pqlab/violation_heap.hpp"
#include "pqlab/quake_heap.hpp"
#include "pqlab/weak_queue.hpp"
#include "pqlab/strict_fibonacci_heap.hpp"
#include "pqlab/variants.hpp"
#include "pqlab/trace.hpp"
#include "pqlab/graph.hpp"
#include "pqlab/workloads.hpp"
#include "pqlab/bench.hpp"
