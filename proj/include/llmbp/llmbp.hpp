#pragma once

#include "llmbp/bp.hpp"
#include "llmbp/bp_io.hpp"
#include "llmbp/defaults.hpp"
#include "llmbp/embedding.hpp"
#include "llmbp/embedding_io.hpp"
#include "llmbp/error.hpp"
#include "llmbp/exact.hpp"
#include "llmbp/experiment.hpp"
#include "llmbp/graph.hpp"
#include "llmbp/graph_io.hpp"
#include "llmbp/homophily.hpp"
#include "llmbp/llm/cache.hpp"
#include "llmbp/llm/hash.hpp"
#include "llmbp/llm/http.hpp"
#include "llmbp/llm/mock.hpp"
#include "llmbp/llm/parse.hpp"
#include "llmbp/llm/prompt.hpp"
#include "llmbp/llm/retry.hpp"
#include "llmbp/llm/types.hpp"
#include "llmbp/metrics.hpp"
#include "llmbp/parallel.hpp"
#include "llmbp/rng.hpp"
#include "llmbp/synthetic.hpp"
