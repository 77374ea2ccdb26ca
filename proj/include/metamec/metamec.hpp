#pragma once

#include "metamec/adam.hpp"
#include "metamec/agents/agent.hpp"
#include "metamec/agents/architecture.hpp"
#include "metamec/agents/gae.hpp"
#include "metamec/agents/ops.hpp"
#include "metamec/distributions.hpp"
#include "metamec/env_vehicle.hpp"
#include "metamec/env_vr.hpp"
#include "metamec/envcore.hpp"
#include "metamec/environment.hpp"
#include "metamec/errors.hpp"
#include "metamec/gradcheck.hpp"
#include "metamec/harness/compare.hpp"
#include "metamec/harness/config.hpp"
#include "metamec/harness/gradcheck_all.hpp"
#include "metamec/harness/metrics.hpp"
#include "metamec/harness/params_io.hpp"
#include "metamec/harness/runner.hpp"
#include "metamec/mlp.hpp"
#include "metamec/rng.hpp"
