#pragma once

#include "readloop/assessment.hpp"
#include "readloop/comprehension.hpp"
#include "readloop/config.hpp"
#include "readloop/content.hpp"
#include "readloop/errors.hpp"
#include "readloop/experiment.hpp"
#include "readloop/learner.hpp"
#include "readloop/ontology.hpp"
#include "readloop/readability.hpp"
#include "readloop/report.hpp"
#include "readloop/rng.hpp"
#include "readloop/stats.hpp"
#include "readloop/text.hpp"
#include "readloop/tracing.hpp"
