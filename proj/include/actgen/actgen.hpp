#pragma once

#include "actgen/error.hpp"
#include "actgen/rng.hpp"
#include "actgen/csv.hpp"
#include "actgen/schedule.hpp"
#include "actgen/ingest.hpp"
#include "actgen/schedule_builder.hpp"
#include "actgen/encoding.hpp"
#include "actgen/neural_net.hpp"
#include "actgen/random_forest.hpp"
#include "actgen/evaluation.hpp"
#include "actgen/synthdata.hpp"
#include "actgen/task_models.hpp"
#include "actgen/generator.hpp"
#include "actgen/pipeline.hpp"
