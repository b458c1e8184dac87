#pragma once

#include <swsearch/align_core.hpp>
#include <swsearch/bench.hpp>
#include <swsearch/dbsearch.hpp>
#include <swsearch/error.hpp>
#include <swsearch/parallel_schemes.hpp>
#include <swsearch/perfmodel.hpp>
#include <swsearch/portability.hpp>
#include <swsearch/scheduler.hpp>
#include <swsearch/seqio.hpp>
