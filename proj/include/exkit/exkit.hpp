#pragma once

#include "exkit/error.hpp"
#include "exkit/ring.hpp"
#include "exkit/ideal.hpp"
#include "exkit/linalg.hpp"
#include "exkit/idempotents.hpp"
#include "exkit/decompose.hpp"
#include "exkit/radical.hpp"
#include "exkit/exchange.hpp"
#include "exkit/colfin.hpp"
#include "exkit/module.hpp"
#include "exkit/io.hpp"
