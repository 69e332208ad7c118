#pragma once

#include "inkrementa/error.hpp"
#include "inkrementa/numkit/matrix.hpp"
#include "inkrementa/numkit/ops.hpp"
#include "inkrementa/numkit/rng.hpp"
#include "inkrementa/model/config.hpp"
#include "inkrementa/model/inc_model.hpp"
#include "inkrementa/model/serialize.hpp"
#include "inkrementa/model/training.hpp"
#include "inkrementa/data/csv.hpp"
#include "inkrementa/data/dataset.hpp"
#include "inkrementa/data/stage_plan.hpp"
#include "inkrementa/data/synthetic.hpp"
#include "inkrementa/continual/exemplar.hpp"
#include "inkrementa/continual/stage_update.hpp"
#include "inkrementa/continual/weight_align.hpp"
#include "inkrementa/harness/ablation.hpp"
#include "inkrementa/harness/config.hpp"
#include "inkrementa/harness/metrics.hpp"
#include "inkrementa/harness/report.hpp"
#include "inkrementa/harness/runner.hpp"
