#pragma once

#include "ragic/bundle.hpp"
#include "ragic/config.hpp"
#include "ragic/critic.hpp"
#include "ragic/date.hpp"
#include "ragic/error.hpp"
#include "ragic/generator.hpp"
#include "ragic/interval.hpp"
#include "ragic/layers.hpp"
#include "ragic/market_data.hpp"
#include "ragic/metrics.hpp"
#include "ragic/pipeline.hpp"
#include "ragic/plot.hpp"
#include "ragic/risk_attention.hpp"
#include "ragic/student_t.hpp"
#include "ragic/synthetic.hpp"
#include "ragic/trainer.hpp"
