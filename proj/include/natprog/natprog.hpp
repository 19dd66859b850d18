#pragma once

#include "natprog/catalog.hpp"
#include "natprog/chain.hpp"
#include "natprog/dp.hpp"
#include "natprog/ds.hpp"
#include "natprog/embedder.hpp"
#include "natprog/env.hpp"
#include "natprog/library.hpp"
#include "natprog/library_io.hpp"
#include "natprog/np.hpp"
#include "natprog/prompt.hpp"
#include "natprog/proposers.hpp"
#include "natprog/sampler.hpp"
#include "natprog/session.hpp"
#include "natprog/sim_users.hpp"
