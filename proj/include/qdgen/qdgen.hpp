#pragma once

#include <qdgen/analytics.hpp>
#include <qdgen/archive.hpp>
#include <qdgen/campaign.hpp>
#include <qdgen/error.hpp>
#include <qdgen/evolve.hpp>
#include <qdgen/graphfeat.hpp>
#include <qdgen/indicators.hpp>
#include <qdgen/instance.hpp>
#include <qdgen/instance_io.hpp>
#include <qdgen/mutation.hpp>
#include <qdgen/random.hpp>
#include <qdgen/rank_test.hpp>
#include <qdgen/report.hpp>
#include <qdgen/run_io.hpp>
#include <qdgen/solvers.hpp>
