#pragma once

#include "affseg/agglo.hpp"
#include "affseg/error.hpp"
#include "affseg/features.hpp"
#include "affseg/malis.hpp"
#include "affseg/metrics.hpp"
#include "affseg/parallel.hpp"
#include "affseg/rag.hpp"
#include "affseg/scorer.hpp"
#include "affseg/stitch.hpp"
#include "affseg/synth.hpp"
#include "affseg/union_find.hpp"
#include "affseg/volume.hpp"
#include "affseg/volume_io.hpp"
#include "affseg/zwatershed.hpp"
