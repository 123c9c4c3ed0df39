#pragma once

#include "ich/core.hpp"
#include "ich/feature_io.hpp"
#include "ich/dimred.hpp"
#include "ich/cluster.hpp"
#include "ich/quality.hpp"
#include "ich/harvest.hpp"
#include "ich/synthgen.hpp"
#include "ich/serialize.hpp"
#include "ich/evaluation.hpp"
#include "ich/report.hpp"
